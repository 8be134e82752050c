import json
import logging
import re

import numpy as np
import requests

from ..exceptions import CorpusFormatError, ReplayError

_WHITESPACE = re.compile(r"(\s+)")


class CommonFuncs:
    def __init__(self, timeout=10):
        self.timeout = timeout


    @staticmethod
    def deriveRng(master_seed, stream_id):
        """Returns an independent random stream for ``(master_seed, stream_id)``.

        Identical arguments always yield identical draw sequences, whatever process or
        thread makes the draws. Documents get one stream each, keyed by their index.

        Args:
            master_seed (int): The profile's 64-bit master seed.
            stream_id (int): The stream identifier, usually a document index.

        Returns:
            numpy.random.Generator: The random stream.
        """

        sequence = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(stream_id),))
        return np.random.default_rng(sequence)

    @staticmethod
    def normalizeWhitespace(text):
        return " ".join(text.split())

    @staticmethod
    def splitTokens(text):
        """Splits text into alternating token and separator pieces.

        Even indices hold tokens (the first and last may be empty when the text starts or
        ends with whitespace), odd indices hold the whitespace runs between them.
        """

        return _WHITESPACE.split(text)

    @staticmethod
    def replayEvents(text, events):
        """Applies an event log to ``text`` and returns the result.

        The events of one pass are applied together, each at its offset into the text
        the pass started from; the next pass starts from the result.

        Raises:
            ReplayError: Raised if an event's original does not match the text at its position,
                or the log is not ordered by pass and position.
        """

        source = text
        pieces = []
        cursor = 0
        currentPass = None
        for event in events:
            if event.pass_index != currentPass:
                if currentPass is not None and event.pass_index < currentPass:
                    raise ReplayError(
                        "OCRRevise: {kind} event of pass {index} follows pass {current}.".format(
                            kind=event.kind.value, index=event.pass_index, current=currentPass
                        )
                    )
                source = "".join(pieces) + source[cursor:]
                pieces, cursor = [], 0
                currentPass = event.pass_index
            if event.position < cursor:
                raise ReplayError(
                    "OCRRevise: {kind} event at position {pos} overlaps the event before it.".format(
                        kind=event.kind.value, pos=event.position
                    )
                )
            if event.position > len(source):
                raise ReplayError(
                    "OCRRevise: {kind} event at position {pos} lies beyond the end of the text.".format(
                        kind=event.kind.value, pos=event.position
                    )
                )
            end = event.position + len(event.original)
            if source[event.position:end] != event.original:
                raise ReplayError(
                    "OCRRevise: {kind} event at position {pos} expected {expected!r}, found {found!r}.".format(
                        kind=event.kind.value, pos=event.position, expected=event.original, found=source[event.position:end]
                    )
                )
            pieces.append(source[cursor:event.position])
            pieces.append(event.replacement)
            cursor = end
        return "".join(pieces) + source[cursor:]

    def readJsonl(self, source):
        """Yields ``(line_number, record)`` for every non-blank line of a JSONL file or URL.

        Args:
            source (str): A filesystem path or an ``http(s)://`` URL.

        Raises:
            CorpusFormatError: Raised if a line is not a JSON object.
            requests.exceptions.HTTPError: Raised if the URL returned an unsuccessful status code.
        """

        if str(source).startswith(("http://", "https://")):
            lines = self._fetchLines(source)
        else:
            lines = self._fileLines(source)

        for lineNumber, line in enumerate(lines, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise CorpusFormatError(
                    "OCRRevise: Malformed JSON on line {line} of {source}: {error}".format(
                        line=lineNumber, source=source, error=e.msg
                    )
                )
            if not isinstance(record, dict):
                raise CorpusFormatError(
                    "OCRRevise: Line {line} of {source} is not a JSON object.".format(line=lineNumber, source=source)
                )
            yield lineNumber, record

    def _fileLines(self, path):
        try:
            with open(path, encoding="utf-8") as f:
                for line in f:
                    yield line
        except OSError:
            logging.error("OCRRevise: Could not read {path}.".format(path=path))
            raise

    def _fetchLines(self, url):
        try:
            response = requests.request("GET", url, timeout=self.timeout)
            response.raise_for_status()
        except requests.exceptions.ConnectTimeout:
            logging.error("OCRRevise: The request for the corpus timed out.")
            raise
        except requests.exceptions.HTTPError:
            logging.error("OCRRevise: The request for the corpus returned an unsuccessfull status code.")
            raise

        response.encoding = "utf-8"
        return response.text.split("\n")
