import logging
import string

from ..common.common_funcs import CommonFuncs
from ..common.types import (
    CHAR_EDIT_PASS,
    CHAR_INSERT_PASS,
    DEL_WORD_PASS,
    SEG_OVER_PASS,
    SEG_UNDER_PASS,
    TRANS_WORD_PASS,
    ChannelOutput,
    ConfusionTable,
    ErrorEvent,
    ErrorKind,
)
from ..exceptions import ProfileFormatError

# visually confusable glyphs, including l/1/!, 5/S and 0/O
DEFAULT_CONFUSIONS = {
    "l": "1!",
    "1": "l!",
    "!": "l1",
    "5": "S",
    "S": "5",
    "0": "Oo",
    "O": "0",
    "o": "0",
    "e": "c",
    "c": "e",
    "u": "v",
    "v": "u",
    "8": "B",
    "B": "8",
    "2": "Z",
    "Z": "2",
    "g": "q",
    "q": "g",
}

INSERTION_ALPHABET = string.ascii_letters + string.digits + ".,;:'\"!?-"

_LINE_BREAKS = frozenset("\n\r\v\f\x1c\x1d\x1e\x85\u2028\u2029")


def _breaksLine(separator):
    return any(c in _LINE_BREAKS for c in separator)


class ChannelsApi:
    def __init__(self, common_funcs: CommonFuncs, confusion: ConfusionTable = None):
        self.common_funcs = common_funcs
        self.confusion = confusion if confusion is not None else self.defaultConfusionTable()


    def defaultConfusionTable(self):
        return ConfusionTable({char: tuple(partners) for char, partners in DEFAULT_CONFUSIONS.items()})

    def loadConfusionTable(self, path):
        """Loads a confusion table from a file of ``<char> -> <partners>`` lines.

        Args:
            path (str): Path of the confusion table file.

        Returns:
            ConfusionTable: The confusion table.

        Raises:
            ProfileFormatError: Raised if a line is malformed or maps a character to itself.
        """

        try:
            with open(path, encoding="utf-8") as f:
                text = f.read()
        except OSError:
            logging.error("OCRRevise: Could not read the confusion table {path}.".format(path=path))
            raise

        return self.parseConfusionTable(text, source=path)

    def parseConfusionTable(self, text, source="<confusion>"):
        entries = {}
        for lineNumber, raw in enumerate(text.splitlines(), start=1):
            line = raw.rstrip("\r\n")
            if not line.strip():
                continue
            if line.startswith("#") and not line.startswith("# -> "):
                continue
            if " -> " not in line:
                raise ProfileFormatError(
                    "OCRRevise: {source}, line {line}: expected '<char> -> <chars>'.".format(
                        source=source, line=lineNumber
                    )
                )
            char, partners = line.split(" -> ", 1)
            partners = partners.strip()
            if len(char) != 1 or char.isspace():
                raise ProfileFormatError(
                    "OCRRevise: {source}, line {line}: {char!r} is not a single visible character.".format(
                        source=source, line=lineNumber, char=char
                    )
                )
            if not partners or any(p.isspace() for p in partners) or char in partners:
                raise ProfileFormatError(
                    "OCRRevise: {source}, line {line}: invalid partners {partners!r} for {char!r}.".format(
                        source=source, line=lineNumber, partners=partners, char=char
                    )
                )
            merged = entries.get(char, ()) + tuple(partners)
            entries[char] = tuple(dict.fromkeys(merged))
        return ConfusionTable(entries)

    def dumpConfusionTable(self, table=None):
        table = table if table is not None else self.confusion
        return "".join(
            "{char} -> {partners}\n".format(char=char, partners="".join(partners))
            for char, partners in sorted(table.entries.items())
        )

    def applyWordPass(self, text, profile, rng):
        """Applies the word-level channels to ``text``.

        The channels run in a fixed order, each as its own pass over the previous one's
        output: word deletion, word transposition, over-segmentation and
        under-segmentation. Line breaks are never removed.

        Args:
            text (str): The input text.
            profile (ContaminationProfile): The error rates.
            rng (numpy.random.Generator): The document's random stream.

        Returns:
            ChannelOutput: The contaminated text, its events and the eligible unit counts.
        """

        events = []
        eligible = {}
        for kind, rate, channel in (
            (ErrorKind.DEL_WORD, profile.del_word, self._deleteWords),
            (ErrorKind.TRANS_WORD, profile.trans_word, self._transposeWords),
            (ErrorKind.SEG_OVER, profile.seg_over, self._overSegment),
            (ErrorKind.SEG_UNDER, profile.seg_under, self._underSegment),
        ):
            text, channelEvents, units = channel(text, rate, rng)
            events.extend(channelEvents)
            eligible[kind] = units
        return ChannelOutput(text=text, events=tuple(events), eligible=eligible)

    @staticmethod
    def _offsets(pieces):
        offsets = []
        offset = 0
        for piece in pieces:
            offsets.append(offset)
            offset += len(piece)
        return offsets

    @staticmethod
    def _applySpans(text, events):
        out = []
        cursor = 0
        for event in events:
            out.append(text[cursor:event.position])
            out.append(event.replacement)
            cursor = event.position + len(event.original)
        out.append(text[cursor:])
        return "".join(out)

    def _deleteWords(self, text, rate, rng):
        pieces = self.common_funcs.splitTokens(text)
        offsets = self._offsets(pieces)
        tokens = [i for i in range(0, len(pieces), 2) if pieces[i]]
        deleted = [u < rate for u in rng.random(len(tokens)).tolist()]

        # a line is a run of tokens joined by separators without line breaks
        lines = []
        for k, i in enumerate(tokens):
            if k == 0 or _breaksLine(pieces[i - 1]):
                lines.append([])
            lines[-1].append(k)

        events = []
        for line in lines:
            kept = [k for k in line if not deleted[k]]
            lastKept = kept[-1] if kept else None
            for k in line:
                if not deleted[k]:
                    continue
                i = tokens[k]
                if lastKept is not None and k > lastKept:
                    start, span = offsets[i - 1], pieces[i - 1] + pieces[i]
                elif k != line[-1]:
                    start, span = offsets[i], pieces[i] + pieces[i + 1]
                else:
                    start, span = offsets[i], pieces[i]
                events.append(ErrorEvent(ErrorKind.DEL_WORD, DEL_WORD_PASS, start, span, ""))
        return self._applySpans(text, events), events, len(tokens)

    def _transposeWords(self, text, rate, rng):
        pieces = self.common_funcs.splitTokens(text)
        offsets = self._offsets(pieces)
        tokens = [i for i in range(0, len(pieces), 2) if pieces[i]]
        draws = rng.random(len(tokens)).tolist()

        events = []
        pairs = 0
        k = 0
        while k < len(tokens) - 1:
            pairs += 1
            if draws[k] < rate:
                left, right = tokens[k], tokens[k + 1]
                separator = pieces[left + 1]
                original = pieces[left] + separator + pieces[right]
                pieces[left], pieces[right] = pieces[right], pieces[left]
                replacement = pieces[left] + separator + pieces[right]
                events.append(ErrorEvent(ErrorKind.TRANS_WORD, TRANS_WORD_PASS, offsets[left], original, replacement))
                k += 2
            else:
                k += 1
        return "".join(pieces), events, pairs

    def _overSegment(self, text, rate, rng):
        pieces = self.common_funcs.splitTokens(text)
        offsets = self._offsets(pieces)
        tokens = [i for i in range(0, len(pieces), 2) if len(pieces[i]) >= 2]
        draws = rng.random(len(tokens)).tolist()

        events = []
        for i, u in zip(tokens, draws):
            if u < rate:
                piece = pieces[i]
                split = int(rng.integers(1, len(piece)))
                broken = piece[:split] + " " + piece[split:]
                events.append(ErrorEvent(ErrorKind.SEG_OVER, SEG_OVER_PASS, offsets[i], piece, broken))
        return self._applySpans(text, events), events, len(tokens)

    def _underSegment(self, text, rate, rng):
        pieces = self.common_funcs.splitTokens(text)
        offsets = self._offsets(pieces)
        separators = [
            i for i in range(1, len(pieces) - 1, 2)
            if pieces[i - 1] and pieces[i + 1] and not _breaksLine(pieces[i])
        ]
        draws = rng.random(len(separators)).tolist()

        events = [
            ErrorEvent(ErrorKind.SEG_UNDER, SEG_UNDER_PASS, offsets[i], pieces[i], "")
            for i, u in zip(separators, draws)
            if u < rate
        ]
        return self._applySpans(text, events), events, len(separators)

    def applyCharPass(self, text, profile, confusion, rng):
        """Applies the character-level channels to ``text`` in two sweeps.

        Sweep A makes one categorical draw per visible character: delete, substitute with a
        confusable partner, swap with the next visible character, or keep. Sweep B inserts a
        random character after each character of sweep A's output. Whitespace is never
        deleted, substituted or swapped.

        Args:
            text (str): The input text.
            profile (ContaminationProfile): The error rates.
            confusion (ConfusionTable): The substitution partners.
            rng (numpy.random.Generator): The document's random stream.

        Returns:
            ChannelOutput: The contaminated text, its events and the eligible unit counts.
        """

        confusion = confusion if confusion is not None else self.confusion
        swept, events, eligible = self._destructiveSweep(text, profile, confusion, rng)
        inserted, insertions = self._insertionSweep(swept, profile.ins_char, rng)
        events.extend(insertions)
        eligible[ErrorKind.INS_CHAR] = len(swept)
        return ChannelOutput(text=inserted, events=tuple(events), eligible=eligible)

    def _destructiveSweep(self, text, profile, confusion, rng):
        deleteBelow = profile.del_char
        substituteBelow = deleteBelow + profile.sub_char
        transposeBelow = substituteBelow + profile.trans_char
        draws = rng.random(len(text)).tolist()

        out = []
        events = []
        drawn = substitutable = swappable = 0
        i = 0
        while i < len(text):
            char = text[i]
            if char.isspace():
                out.append(char)
                i += 1
                continue

            partners = confusion.partners(char)
            canSwap = i + 1 < len(text) and not text[i + 1].isspace()
            drawn += 1
            substitutable += bool(partners)
            swappable += canSwap

            u = draws[i]
            if u < deleteBelow:
                events.append(ErrorEvent(ErrorKind.DEL_CHAR, CHAR_EDIT_PASS, i, char, ""))
                i += 1
            elif u < substituteBelow and partners:
                partner = partners[int(rng.integers(len(partners)))]
                events.append(ErrorEvent(ErrorKind.SUB_CHAR, CHAR_EDIT_PASS, i, char, partner))
                out.append(partner)
                i += 1
            elif substituteBelow <= u < transposeBelow and canSwap:
                swapped = text[i + 1] + char
                events.append(ErrorEvent(ErrorKind.TRANS_CHAR, CHAR_EDIT_PASS, i, char + text[i + 1], swapped))
                out.append(swapped)
                i += 2
            else:
                out.append(char)
                i += 1

        eligible = {
            ErrorKind.DEL_CHAR: drawn,
            ErrorKind.SUB_CHAR: substitutable,
            ErrorKind.TRANS_CHAR: swappable,
        }
        return "".join(out), events, eligible

    def _insertionSweep(self, text, rate, rng):
        draws = rng.random(len(text)).tolist()
        out = []
        events = []
        for position, (char, u) in enumerate(zip(text, draws), start=1):
            out.append(char)
            if u < rate:
                inserted = INSERTION_ALPHABET[int(rng.integers(len(INSERTION_ALPHABET)))]
                events.append(ErrorEvent(ErrorKind.INS_CHAR, CHAR_INSERT_PASS, position, "", inserted))
                out.append(inserted)
        return "".join(out), events

    def applyGranular(self, text, profile, confusion, rng):
        """Applies the word pass and then the character pass to ``text``.

        Returns:
            ChannelOutput: The contaminated text with the word pass events (passes 1 to 4)
            followed by the character pass events (passes 5 and 6).
        """

        words = self.applyWordPass(text, profile, rng)
        chars = self.applyCharPass(words.text, profile, confusion, rng)
        eligible = dict(words.eligible)
        eligible.update(chars.eligible)
        return ChannelOutput(text=chars.text, events=words.events + chars.events, eligible=eligible)
