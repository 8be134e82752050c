import dataclasses
import heapq
import itertools
import json

import numpy as np
import pytest
from OCRRevise.common.types import ConfusionTable, ContaminationProfile, ErrorCategory, Lexicon
from OCRRevise.exceptions import ModelError, ProfileFormatError
from tests.mock_responses import MockCorpus

_SEGMENT_LEXICON = Lexicon(
    {"a": 5, "ab": 3, "abc": 2, "ca": 4, "b": 1, "cab": 2, "bc": 1, "cc": 1, "bca": 2}, total=21
)

_REPAIR_ALPHABET = "abol10"
_REPAIR_CONFUSION = ConfusionTable({"l": ("1",), "1": ("l",), "o": ("0",), "0": ("o",)})


def _segmentationCost(text, words, lexicon, penalty=1.0, unknown=3.0):
    tokens = text.split()
    observedSpans = set()
    observed = set()
    offset = 0
    for token in tokens:
        observedSpans.add((offset, offset + len(token)))
        offset += len(token)
        observed.add(offset)
    observed.discard(offset)

    cost = 0.0
    chosen = set()
    position = 0
    for word in words:
        start, end = position, position + len(word)
        if lexicon.knows(word):
            cost += lexicon.cost(word)
        elif len(word) <= 20 or (start, end) in observedSpans:
            cost += unknown * len(word)
        else:
            return float("inf")
        position = end
        chosen.add(end)
    chosen.discard(position)
    return cost + penalty * len(chosen ^ observed)


def _allSegmentations(chars):
    for cuts in itertools.product((False, True), repeat=len(chars) - 1):
        words = []
        start = 0
        for i, cut in enumerate(cuts, start=1):
            if cut:
                words.append(chars[start:i])
                start = i
        words.append(chars[start:])
        yield words


def _editNeighbours(word, confusion):
    for i in range(len(word)):
        yield word[:i] + word[i + 1:], 1.0
        for char in _REPAIR_ALPHABET:
            if char != word[i]:
                yield word[:i] + char + word[i + 1:], 0.5 if confusion.confusable(word[i], char) else 1.0
        if i + 1 < len(word) and word[i] != word[i + 1]:
            yield word[:i] + word[i + 1] + word[i] + word[i + 2:], 1.0
    for i in range(len(word) + 1):
        for char in _REPAIR_ALPHABET:
            yield word[:i] + char + word[i:], 1.0


def _reachable(token, confusion, budget):
    """Every string within ``budget`` of ``token`` under single edit operations."""

    distances = {token: 0.0}
    queue = [(0.0, token)]
    while queue:
        distance, word = heapq.heappop(queue)
        if distance > distances[word]:
            continue
        for neighbour, step in _editNeighbours(word, confusion):
            total = distance + step
            if total <= budget and total < distances.get(neighbour, float("inf")):
                distances[neighbour] = total
                heapq.heappush(queue, (total, neighbour))
    return distances


def _repairOracle(token, lexicon, confusion, max_edits):
    if lexicon.knows(token):
        return token
    distances = _reachable(token, confusion, max_edits)
    candidates = [
        (distances[word] + lexicon.cost(word), distances[word], word) for word in lexicon.entries if word in distances
    ]
    return min(candidates)[2] if candidates else token


def _randomWord(rng, low, high):
    return "".join(_REPAIR_ALPHABET[i] for i in rng.integers(len(_REPAIR_ALPHABET), size=int(rng.integers(low, high + 1))))


class TestCorrectorApi:
    def test_trainModels_counts_words_and_bigrams(self, toolkit):
        lexicon, lm = toolkit.corrector.trainModels(["a b a"])

        assert lexicon.entries == {"a": 2, "b": 1}
        assert lexicon.total == 3
        assert lm.bigrams == {("a", "b"): 1, ("b", "a"): 1}

    def test_trainModels_bigrams_stay_within_documents(self, toolkit):
        _, lm = toolkit.corrector.trainModels(["x y", "z"])

        assert ("y", "z") not in lm.bigrams

    @pytest.mark.parametrize("smoothing_k", [0, -0.5])
    def test_trainModels_non_positive_smoothing_raises_ModelError(self, toolkit, smoothing_k):
        with pytest.raises(ModelError):
            toolkit.corrector.trainModels(["a b a"], smoothing_k=smoothing_k)

    def test_trainModels_empty_corpus_raises_ModelError(self, toolkit):
        with pytest.raises(ModelError):
            toolkit.corrector.trainModels(["  ", ""])

    def test_saveModels_loads_back_unchanged(self, toolkit, tmp_path):
        models = toolkit.corrector.trainModels(MockCorpus.documents(3), smoothing_k=0.25)
        path = tmp_path / "model.json"

        toolkit.corrector.saveModels(models, str(path))

        assert toolkit.corrector.loadModels(str(path)) == models

    def test_loadModels_other_version_raises_ModelError(self, toolkit, tmp_path):
        path = tmp_path / "model.json"
        toolkit.corrector.saveModels(toolkit.corrector.trainModels(["a b a"]), str(path))
        artifact = json.loads(path.read_text(encoding="utf-8"))
        artifact["version"] = 99
        path.write_text(json.dumps(artifact), encoding="utf-8")

        with pytest.raises(ModelError):
            toolkit.corrector.loadModels(str(path))

    def test_loadModels_invalid_json_raises_ProfileFormatError(self, toolkit, tmp_path):
        path = tmp_path / "model.json"
        path.write_text("{not json", encoding="utf-8")

        with pytest.raises(ProfileFormatError):
            toolkit.corrector.loadModels(str(path))

    def test_loadModels_missing_fields_raise_ProfileFormatError(self, toolkit, tmp_path):
        path = tmp_path / "model.json"
        path.write_text(json.dumps({"format": "ocrrevise-bigram", "version": 1}), encoding="utf-8")

        with pytest.raises(ProfileFormatError):
            toolkit.corrector.loadModels(str(path))

    def test_deinterleaveBest_single_line(self, toolkit, trained):
        _, (_, lm) = trained

        assert toolkit.corrector.deinterleaveBest(["only one line"], lm) == (["only one line"], 1)

    def test_deinterleaveBest_recovers_columnized_section(self, toolkit, trained):
        documents, (_, lm) = trained
        section = list(toolkit.layout.wrapLines(documents[0].text, 80).lines[:12])
        interleaved, _ = toolkit.layout.columnize(section, 2)

        assert toolkit.corrector.deinterleaveBest(interleaved, lm) == (section, 2)
        assert toolkit.corrector.deinterleaveBest(section, lm) == (section, 1)

    def test_deinterleaveBest_finds_column_count_of_column_only_corpus(self, toolkit, trained):
        documents, (_, lm) = trained
        zero = {name: 0.0 for name in ContaminationProfile().rates()}
        profile = dataclasses.replace(ContaminationProfile(master_seed=17), p_multicolumn_section=1.0, **zero)

        total = hits = 0
        for pair in toolkit.pipeline.synthesize(documents, profile):
            lines = pair.contaminated.split("\n")
            for section in pair.layout.sections:
                if section.num_lines < 8:
                    continue
                read = lines[section.start_line:section.start_line + section.num_lines]
                _, chosen = toolkit.corrector.deinterleaveBest(read, lm)
                total += 1
                hits += chosen == section.columns

        assert total >= 100
        assert hits / total >= 0.9

    def test_segmentViterbi_splits_merged_words(self, toolkit):
        lexicon = Lexicon({"the": 100, "cat": 50, "theca": 1, "t": 1}, total=152)

        assert toolkit.corrector.segmentViterbi("thecat", lexicon, spacing_penalty=0) == "the cat"
        assert toolkit.corrector.segmentViterbi("the cat", lexicon) == "the cat"
        assert toolkit.corrector.segmentViterbi("", lexicon) == ""

    def test_segmentViterbi_keeps_long_unknown_token(self, toolkit):
        token = "q" * 25

        assert toolkit.corrector.segmentViterbi("a " + token, _SEGMENT_LEXICON) == "a " + token

    def test_segmentViterbi_observed_token_exceeds_unknown_span(self, toolkit):
        assert toolkit.corrector.segmentViterbi("a qqqqq", _SEGMENT_LEXICON, max_unknown_span=3) == "a qqqqq"
        assert toolkit.corrector.segmentViterbi("qqqqq", _SEGMENT_LEXICON, max_unknown_span=2) == "qqqqq"

    def test_segmentViterbi_matches_brute_force(self, toolkit):
        rng = np.random.default_rng(18)
        for _ in range(200):
            chars = "".join("abcd"[i] for i in rng.integers(4, size=int(rng.integers(1, 13))))
            text = "".join(c + (" " if rng.random() < 0.3 else "") for c in chars).strip()

            result = toolkit.corrector.segmentViterbi(text, _SEGMENT_LEXICON)

            assert result.replace(" ", "") == chars
            best = min(_segmentationCost(text, words, _SEGMENT_LEXICON) for words in _allSegmentations(chars))
            assert _segmentationCost(text, result.split(), _SEGMENT_LEXICON) == pytest.approx(best), text

    def test_repairToken_confusable_substitution(self, toolkit):
        lexicon = Lexicon({"hello": 3}, total=3)

        assert toolkit.corrector.repairToken("he1lo", lexicon) == "hello"
        assert toolkit.corrector.repairToken("hello", lexicon) == "hello"
        assert toolkit.corrector.repairToken("zzqq", lexicon) == "zzqq"

    def test_repairToken_restores_case(self, toolkit):
        lexicon = Lexicon({"hello": 3}, total=3)

        assert toolkit.corrector.repairToken("He1lo", lexicon) == "Hello"
        assert toolkit.corrector.repairToken("HE1LO", lexicon) == "HELLO"

    def test_repairToken_leaves_punctuation_alone(self, toolkit):
        assert toolkit.corrector.repairToken("--", Lexicon({"hello": 3}, total=3)) == "--"

    def test_repairToken_bad_budget_raises_ModelError(self, toolkit):
        with pytest.raises(ModelError):
            toolkit.corrector.repairToken("he1lo", Lexicon({"hello": 3}, total=3), max_edits=3)

    def test_weightedDistance_costs(self, toolkit):
        confusion = _REPAIR_CONFUSION

        assert toolkit.corrector.weightedDistance("he1lo", "hello", confusion) == 0.5
        assert toolkit.corrector.weightedDistance("ab", "ba", confusion) == 1.0
        assert toolkit.corrector.weightedDistance("l0", "ol", confusion) == 1.5
        assert toolkit.corrector.weightedDistance("l0", "o1", confusion) == 2.0
        assert toolkit.corrector.weightedDistance("ab", "bxa", confusion) == 2.0
        assert toolkit.corrector.weightedDistance("", "abc", confusion) == 3.0

    @pytest.mark.parametrize("max_edits", [1, 2])
    def test_repairToken_matches_exhaustive_search(self, toolkit, max_edits):
        rng = np.random.default_rng(100 + max_edits)
        words = sorted({_randomWord(rng, 2, 5) for _ in range(25)})
        lexicon = Lexicon({word: int(rng.integers(1, 50)) for word in words}, total=0)
        lexicon = Lexicon(lexicon.entries, total=sum(lexicon.entries.values()))

        for _ in range(100):
            if rng.random() < 0.7:
                token = words[int(rng.integers(len(words)))]
                for _ in range(int(rng.integers(1, 3))):
                    neighbours = list(_editNeighbours(token, _REPAIR_CONFUSION))
                    token = neighbours[int(rng.integers(len(neighbours)))][0] or token
            else:
                token = _randomWord(rng, 1, 5)
            token = token[:5]

            expected = _repairOracle(token, lexicon, _REPAIR_CONFUSION, max_edits)

            assert toolkit.corrector.repairToken(token, lexicon, _REPAIR_CONFUSION, max_edits) == expected, token

    def test_correct_leaves_clean_text_unchanged(self, toolkit, trained):
        documents, models = trained

        for document in documents[:20]:
            clean = "\n".join(toolkit.layout.wrapLines(document.text, 80).lines)

            correction = toolkit.corrector.correct(clean, models)

            assert correction.text == clean
            assert set(correction.chosen_columns_per_section) == {1}
            assert set(correction.stage_diagnostics.values()) == {0}

    def test_correct_reports_every_category(self, toolkit, trained):
        _, models = trained

        correction = toolkit.corrector.correct("", models)

        assert correction.text == ""
        assert set(correction.stage_diagnostics) == {category.value for category in ErrorCategory}
        assert "transposition" in correction.stage_diagnostics

    def test_correct_keeps_blank_lines(self, toolkit, trained):
        documents, models = trained
        lines = toolkit.layout.wrapLines(documents[1].text, 80).lines
        text = "\n".join(lines[:3]) + "\n\n" + "\n".join(lines[3:6])

        assert toolkit.corrector.correct(text, models).text == text

    def test_correct_repairs_confusable_token(self, toolkit, trained):
        documents, models = trained
        lexicon, _ = models
        word = max(
            (w for w in lexicon.entries if w.isalpha() and w.islower() and "o" in w),
            key=lambda w: (lexicon.entries[w], w),
        )
        broken = word.replace("o", "0", 1)

        correction = toolkit.corrector.correct(broken, models)

        assert correction.text == word
        assert correction.stage_diagnostics["substitution"] == 1

    def test_correct_merges_split_word(self, toolkit, trained):
        _, models = trained
        lexicon, _ = models
        words = [w for w in sorted(lexicon.entries) if w.isalpha() and w.islower()][:3]
        text = "{0} {1} {2}".format(words[0], words[1][:3] + " " + words[1][3:], words[2])

        correction = toolkit.corrector.correct(text, models, profile_hint=ContaminationProfile(p_multicolumn_section=0.0))

        assert correction.text == " ".join(words)
        assert correction.stage_diagnostics["segmentation"] == 1

    def test_correct_reduces_error_rate_of_synthesized_corpus(self, toolkit, synthesized):
        pairs, corrected = synthesized

        report = toolkit.metrics.evaluatePairs(corrected, pairs)

        assert report.document_count == 200
        assert report.cer_after <= 0.7 * report.cer_before
        assert report.improved_fraction >= 0.9

    def test_correctMany_output_independent_of_jobs(self, toolkit, trained, profile):
        documents, models = trained
        items = [(pair.id, pair.contaminated) for pair in toolkit.pipeline.synthesize(documents[:6], profile)]

        serial = list(toolkit.corrector.correctMany(items, models, jobs=1))
        parallel = list(toolkit.corrector.correctMany(items, models, jobs=2))

        assert serial == parallel
        assert [docId for docId, _ in serial] == [docId for docId, _ in items]

    def test_correct_resegments_repaired_words(self, toolkit):
        models = toolkit.corrector.trainModels(["the cat sat.", "sat down"])
        hint = ContaminationProfile(p_multicolumn_section=0.0)

        correction = toolkit.corrector.correct("the cat sa1 .", models, profile_hint=hint)

        assert correction.text == "the cat sat."
        assert correction.stage_diagnostics["segmentation"] == 1
        assert toolkit.corrector.correct(correction.text, models, profile_hint=hint).text == correction.text

    def test_correct_is_idempotent(self, toolkit, trained, synthesized, profile):
        _, models = trained
        pairs, corrected = synthesized

        for pair in pairs[:30]:
            again = toolkit.corrector.correct(corrected[pair.id], models, profile_hint=profile)

            assert again.text == corrected[pair.id], pair.id

    def test_correct_counts_transposition(self, toolkit, trained):
        _, models = trained
        lexicon, _ = models
        word = max(
            (
                w
                for w in lexicon.entries
                if w.isalpha() and w.islower() and len(w) >= 5 and w[1] != w[2] and not lexicon.knows(w[0] + w[2] + w[1] + w[3:])
            ),
            key=lambda w: (lexicon.entries[w], w),
        )
        broken = word[0] + word[2] + word[1] + word[3:]

        correction = toolkit.corrector.correct(broken, models, profile_hint=ContaminationProfile(p_multicolumn_section=0.0))

        assert correction.text == word
        assert correction.stage_diagnostics["transposition"] == 1
        assert correction.stage_diagnostics["substitution"] == 0

    def test_correct_only_segmentation_leaves_tokens_unrepaired(self, toolkit, trained):
        _, models = trained
        lexicon, _ = models
        words = [w for w in sorted(lexicon.entries) if w.isalpha() and w.islower()][:2]
        text = "{0} {1} {2} x0x".format(words[0], words[1][:3], words[1][3:])

        correction = toolkit.corrector.correct(text, models, only="segmentation")

        assert correction.text == "{0} {1} x0x".format(*words)
        assert correction.stage_diagnostics["segmentation"] == 1
        assert sum(correction.stage_diagnostics.values()) == 1
        assert set(correction.chosen_columns_per_section) == {1}

    def test_correct_only_repair_category_filters_candidates(self, toolkit, trained):
        _, models = trained
        lexicon, _ = models
        word = max(
            (w for w in lexicon.entries if w.isalpha() and w.islower() and "o" in w),
            key=lambda w: (lexicon.entries[w], w),
        )
        broken = word.replace("o", "0", 1)

        assert toolkit.corrector.correct(broken, models, only="substitution").text == word
        assert toolkit.corrector.correct(broken, models, only=ErrorCategory.DELETION).text == broken
        assert toolkit.corrector.correct(broken, models, only="column_reading_order").text == broken

    def test_correct_unknown_only_raises_ModelError(self, toolkit, trained):
        _, models = trained

        with pytest.raises(ModelError):
            toolkit.corrector.correct("text", models, only="spelling")
        with pytest.raises(ModelError):
            list(toolkit.corrector.correctMany([("a", "text")], models, only="spelling"))
