import math
from dataclasses import dataclass, field, fields
from enum import Enum
from typing import Dict, FrozenSet, List, Optional, Tuple


class ErrorKind(str, Enum):
    """The kinds of injected errors recorded in an event log."""

    DEL_CHAR = "DelChar"
    DEL_WORD = "DelWord"
    SUB_CHAR = "SubChar"
    TRANS_CHAR = "TransChar"
    TRANS_WORD = "TransWord"
    SEG_OVER = "SegOver"
    SEG_UNDER = "SegUnder"
    INS_CHAR = "InsChar"
    COLUMN_INTERLEAVE = "ColumnInterleave"


class ErrorCategory(str, Enum):
    """The six categories of the OCR error taxonomy."""

    COLUMN_READING_ORDER = "column_reading_order"
    SEGMENTATION = "segmentation"
    DELETION = "deletion"
    SUBSTITUTION = "substitution"
    INSERTION = "insertion"
    TRANSPOSITION = "transposition"


KIND_CATEGORY = {
    ErrorKind.DEL_CHAR: ErrorCategory.DELETION,
    ErrorKind.DEL_WORD: ErrorCategory.DELETION,
    ErrorKind.SUB_CHAR: ErrorCategory.SUBSTITUTION,
    ErrorKind.TRANS_CHAR: ErrorCategory.TRANSPOSITION,
    ErrorKind.TRANS_WORD: ErrorCategory.TRANSPOSITION,
    ErrorKind.SEG_OVER: ErrorCategory.SEGMENTATION,
    ErrorKind.SEG_UNDER: ErrorCategory.SEGMENTATION,
    ErrorKind.INS_CHAR: ErrorCategory.INSERTION,
    ErrorKind.COLUMN_INTERLEAVE: ErrorCategory.COLUMN_READING_ORDER,
}

# profile rate field -> the event kind it produces
RATE_KINDS = {
    "del_char": ErrorKind.DEL_CHAR,
    "del_word": ErrorKind.DEL_WORD,
    "seg_over": ErrorKind.SEG_OVER,
    "seg_under": ErrorKind.SEG_UNDER,
    "trans_char": ErrorKind.TRANS_CHAR,
    "trans_word": ErrorKind.TRANS_WORD,
    "sub_char": ErrorKind.SUB_CHAR,
    "ins_char": ErrorKind.INS_CHAR,
}

# pass indexes, in the order the passes run; an event's position is an offset into its pass's input
LAYOUT_PASS = 0
DEL_WORD_PASS = 1
TRANS_WORD_PASS = 2
SEG_OVER_PASS = 3
SEG_UNDER_PASS = 4
CHAR_EDIT_PASS = 5
CHAR_INSERT_PASS = 6
WORD_PASSES = (DEL_WORD_PASS, TRANS_WORD_PASS, SEG_OVER_PASS, SEG_UNDER_PASS)
CHAR_PASSES = (CHAR_EDIT_PASS, CHAR_INSERT_PASS)


@dataclass(frozen=True)
class ContaminationProfile:
    """Per-type error rates, layout parameters and the master seed of a contamination run.

    The rate defaults are the contaminated proportions used to build the training corpora:
    0.07/0.02 deletion (char/word), 0.05/0.05 segmentation (over/under), 0.05/0.02
    transposition (char/word), 0.05 substitution and 0.05 insertion. Rates are per-unit
    application probabilities, the unit being a character or a word as the name says.
    """

    del_char: float = 0.07
    del_word: float = 0.02
    seg_over: float = 0.05
    seg_under: float = 0.05
    trans_char: float = 0.05
    trans_word: float = 0.02
    sub_char: float = 0.05
    ins_char: float = 0.05
    line_width: int = 80
    section_lines_min: int = 6
    section_lines_max: int = 12
    p_multicolumn_section: float = 0.5
    allowed_columns: FrozenSet[int] = frozenset({2, 3})
    master_seed: int = 0

    @classmethod
    def fieldNames(cls) -> List[str]:
        return [f.name for f in fields(cls)]

    def rates(self) -> Dict[str, float]:
        return {name: getattr(self, name) for name in RATE_KINDS}


@dataclass(frozen=True)
class ErrorEvent:
    """Provenance record of one injected error.

    ``position`` is the offset into the input text of the pass that produced the event.
    A log lists its events by (pass_index, position), and the events of one pass cover
    disjoint spans of that pass's input.
    """

    kind: ErrorKind
    pass_index: int
    position: int
    original: str
    replacement: str

    def toRecord(self) -> dict:
        return {
            "kind": self.kind.value,
            "pass_index": self.pass_index,
            "position": self.position,
            "original": self.original,
            "replacement": self.replacement,
        }

    @classmethod
    def fromRecord(cls, record: dict) -> "ErrorEvent":
        return cls(
            kind=ErrorKind(record["kind"]),
            pass_index=int(record["pass_index"]),
            position=int(record["position"]),
            original=record["original"],
            replacement=record["replacement"],
        )


@dataclass(frozen=True)
class CleanDocument:
    id: str
    text: str


@dataclass(frozen=True)
class LineTemplate:
    """Single-column template of a document: wrapped lines of at most ``width`` characters."""

    lines: Tuple[str, ...]
    width: int


@dataclass(frozen=True)
class SectionSpec:
    start_line: int
    num_lines: int
    columns: int
    heights: Tuple[int, ...]

    def toRecord(self) -> list:
        return [self.start_line, self.num_lines, self.columns, list(self.heights)]

    @classmethod
    def fromRecord(cls, record) -> "SectionSpec":
        start_line, num_lines, columns, heights = record
        return cls(int(start_line), int(num_lines), int(columns), tuple(int(h) for h in heights))


@dataclass(frozen=True)
class SectionLayout:
    """Per-section column metadata. Sections tile the document's lines contiguously."""

    sections: Tuple[SectionSpec, ...] = ()

    def toRecord(self) -> dict:
        return {"sections": [section.toRecord() for section in self.sections]}

    @classmethod
    def fromRecord(cls, record: dict) -> "SectionLayout":
        return cls(tuple(SectionSpec.fromRecord(section) for section in record["sections"]))


@dataclass(frozen=True)
class ContaminatedDocument:
    id: str
    text: str
    layout: SectionLayout
    events: Tuple[ErrorEvent, ...]
    clean_ref: str


@dataclass(frozen=True)
class ChannelOutput:
    """Output of an error channel.

    ``eligible`` counts, per event kind, the units on which the channel could have fired.
    """

    text: str
    events: Tuple[ErrorEvent, ...] = ()
    eligible: Dict[ErrorKind, int] = field(default_factory=dict)


@dataclass(frozen=True)
class ConfusionTable:
    """Map from a character to the visually confusable characters it may be misread as."""

    entries: Dict[str, Tuple[str, ...]]

    def partners(self, char: str) -> Tuple[str, ...]:
        return self.entries.get(char, ())

    def confusable(self, a: str, b: str) -> bool:
        return b in self.entries.get(a, ()) or a in self.entries.get(b, ())


@dataclass(frozen=True)
class ParallelPair:
    id: str
    clean: str
    contaminated: str
    layout: SectionLayout
    events: Tuple[ErrorEvent, ...]


@dataclass(frozen=True)
class PromptTemplate:
    system_text: str


@dataclass(frozen=True)
class Lexicon:
    """Word counts of a clean corpus, case preserved."""

    entries: Dict[str, int]
    total: int

    def __len__(self):
        return len(self.entries)

    def __contains__(self, word):
        return word in self.entries

    def count(self, word: str) -> int:
        """Count of ``word``, falling back to its lowercase form. Zero if unknown."""
        if word in self.entries:
            return self.entries[word]
        return self.entries.get(word.lower(), 0)

    def knows(self, word: str) -> bool:
        return word in self.entries or word.lower() in self.entries

    def cost(self, word: str) -> float:
        """Negative log of the add-one smoothed unigram probability."""
        return -math.log((self.count(word) + 1) / (self.total + len(self.entries)))


@dataclass(frozen=True)
class NGramModel:
    """Word bigram model with additive smoothing."""

    unigrams: Dict[str, int]
    bigrams: Dict[Tuple[str, str], int]
    k: float = 0.1

    @property
    def vocabulary_size(self) -> int:
        # one extra slot for unseen words
        return len(self.unigrams) + 1

    def logProb(self, previous: str, word: str) -> float:
        count = self.bigrams.get((previous, word), 0)
        context = self.unigrams.get(previous, 0)
        return math.log((count + self.k) / (context + self.k * self.vocabulary_size))

    def score(self, tokens: List[str]) -> float:
        return sum(self.logProb(tokens[i], tokens[i + 1]) for i in range(len(tokens) - 1))

    def averageScore(self, tokens: List[str]) -> float:
        if len(tokens) < 2:
            return 0.0
        return self.score(tokens) / (len(tokens) - 1)


@dataclass(frozen=True)
class Correction:
    text: str
    chosen_columns_per_section: Tuple[int, ...] = ()
    stage_diagnostics: Dict[str, int] = field(default_factory=dict)


@dataclass(frozen=True)
class EditStats:
    distance: int
    insertions: int
    deletions: int
    substitutions: int


@dataclass(frozen=True)
class EvalReport:
    cer_before: float
    cer_after: float
    wer_before: float
    wer_after: float
    per_error_type: Dict[str, Tuple[float, float]]
    document_count: int
    improved_fraction: float

    @property
    def cer(self) -> float:
        return self.cer_after

    @property
    def wer(self) -> float:
        return self.wer_after

    def toRecord(self) -> dict:
        return {
            "cer_before": self.cer_before,
            "cer_after": self.cer_after,
            "wer_before": self.wer_before,
            "wer_after": self.wer_after,
            "per_error_type": {kind: list(pair) for kind, pair in sorted(self.per_error_type.items())},
            "document_count": self.document_count,
            "improved_fraction": self.improved_fraction,
        }


@dataclass(frozen=True)
class RetrievalReport:
    recall_at: Dict[int, float]
    variant: str
    query_count: int

    def toRecord(self) -> dict:
        return {
            "variant": self.variant,
            "query_count": self.query_count,
            "recall_at": {str(k): self.recall_at[k] for k in sorted(self.recall_at)},
        }
