from ..common.common_funcs import CommonFuncs
from ..common.types import (
    LAYOUT_PASS,
    ErrorEvent,
    ErrorKind,
    LineTemplate,
    SectionLayout,
    SectionSpec,
)
from ..exceptions import EmptyInputError, LayoutError


class LayoutApi:
    def __init__(self, common_funcs: CommonFuncs):
        self.common_funcs = common_funcs


    def wrapLines(self, text, width):
        """Wraps text greedily into lines of at most ``width`` characters.

        Words are packed left to right; a word that would overflow the line starts a new
        one, and a single word longer than ``width`` is hard-split at width boundaries.

        Args:
            text (str): The raw text. Whitespace is normalized before wrapping.
            width (int): The maximum line length, at least 8.

        Returns:
            LineTemplate: The single-column template.

        Raises:
            EmptyInputError: Raised if the text is empty or whitespace only.
            LayoutError: Raised if ``width`` is smaller than 8.

        Example:
            >>> from OCRRevise import OCRRevise as ocr
            >>> toolkit = ocr.OCRRevise()
            >>> toolkit.layout.wrapLines("aa bb cc dd", width=8).lines
            ('aa bb cc', 'dd')
        """

        if width < 8:
            raise LayoutError("OCRRevise: Line width must be at least 8, got {0}.".format(width))
        words = text.split()
        if not words:
            raise EmptyInputError("OCRRevise: Cannot wrap empty text.")

        lines = []
        current = ""
        for word in words:
            while len(word) > width:
                if current:
                    lines.append(current)
                    current = ""
                lines.append(word[:width])
                word = word[width:]
            if not word:
                continue
            if not current:
                current = word
            elif len(current) + 1 + len(word) <= width:
                current = current + " " + word
            else:
                lines.append(current)
                current = word
        if current:
            lines.append(current)
        return LineTemplate(lines=tuple(lines), width=width)

    @staticmethod
    def balancedHeights(num_lines, columns):
        """Column heights of a balanced split, taller columns first."""

        quotient, remainder = divmod(num_lines, columns)
        return [quotient + 1] * remainder + [quotient] * (columns - remainder)

    def columnize(self, section_lines, columns):
        """Reads a section as if it were set in ``columns`` columns, row by row.

        The lines are split sequentially into columns of balanced heights and emitted
        row-major: the first line of every column, then the second line of every
        column, and so on.

        Args:
            section_lines (list): The section's lines in reading order.
            columns (int): The number of columns, at least 2.

        Returns:
            tuple: The interleaved lines (list) and the column heights (list).

        Raises:
            LayoutError: Raised if ``columns`` is below 2 or exceeds the number of lines.
        """

        if columns < 2:
            raise LayoutError("OCRRevise: A multi-column section needs at least 2 columns, got {0}.".format(columns))
        if len(section_lines) < columns:
            raise LayoutError(
                "OCRRevise: Cannot split {lines} lines into {columns} columns.".format(
                    lines=len(section_lines), columns=columns
                )
            )

        heights = self.balancedHeights(len(section_lines), columns)
        return self._interleave(list(section_lines), heights), heights

    def _interleave(self, lines, heights):
        starts = []
        start = 0
        for height in heights:
            starts.append(start)
            start += height
        interleaved = []
        for row in range(heights[0]):
            for column, height in enumerate(heights):
                if row < height:
                    interleaved.append(lines[starts[column] + row])
        return interleaved

    def invertColumnize(self, interleaved, heights):
        """Restores the reading order of a row-major interleaved section.

        Args:
            interleaved (list): The lines as produced by ``columnize``.
            heights (list): The column heights returned by ``columnize``.

        Returns:
            list: The lines in column order.

        Raises:
            LayoutError: Raised if the heights are not balanced or do not sum to the line count.
        """

        heights = list(heights)
        if not heights or any(h < 1 for h in heights):
            raise LayoutError("OCRRevise: Column heights must be positive, got {0}.".format(heights))
        if sum(heights) != len(interleaved):
            raise LayoutError(
                "OCRRevise: Column heights {heights} do not match {lines} lines.".format(
                    heights=heights, lines=len(interleaved)
                )
            )
        if heights != self.balancedHeights(len(interleaved), len(heights)):
            raise LayoutError("OCRRevise: Column heights {0} are not a balanced partition.".format(heights))

        columns = [[] for _ in heights]
        position = 0
        for row in range(heights[0]):
            for column, height in enumerate(heights):
                if row < height:
                    columns[column].append(interleaved[position])
                    position += 1
        return [line for column in columns for line in column]

    def contaminateLayout(self, template, profile, rng):
        """Simulates column reading-order errors on a line template.

        The lines are cut into consecutive sections whose sizes are drawn uniformly from
        ``[section_lines_min, section_lines_max]`` (the last section may be shorter).
        A section long enough to hold two lines per column is converted to a
        multi-column layout with probability ``p_multicolumn_section`` and read row-major.

        Args:
            template (LineTemplate): The single-column template.
            profile (ContaminationProfile): The layout parameters.
            rng (numpy.random.Generator): The document's random stream.

        Returns:
            tuple: The contaminated lines (list), the SectionLayout and the ColumnInterleave events (list).
        """

        lines = list(template.lines)
        allowed = sorted(profile.allowed_columns)
        out = []
        sections = []
        events = []
        offset = 0
        start = 0
        while start < len(lines):
            size = int(rng.integers(profile.section_lines_min, profile.section_lines_max + 1))
            section = lines[start:start + size]
            columns = 1
            u = float(rng.random())
            if allowed and len(section) >= 2 * allowed[0] and u < profile.p_multicolumn_section:
                columns = min(allowed[int(rng.integers(len(allowed)))], len(section))

            if columns > 1:
                interleaved, heights = self.columnize(section, columns)
                events.append(
                    ErrorEvent(
                        ErrorKind.COLUMN_INTERLEAVE,
                        LAYOUT_PASS,
                        offset,
                        "\n".join(section),
                        "\n".join(interleaved),
                    )
                )
            else:
                interleaved, heights = section, [len(section)]

            sections.append(SectionSpec(start, len(section), columns, tuple(heights)))
            out.extend(interleaved)
            offset += sum(len(line) + 1 for line in section)
            start += len(section)
        return out, SectionLayout(tuple(sections)), events

    def restoreLayout(self, lines, layout):
        """Inverts a document's column interleaving section by section.

        Raises:
            LayoutError: Raised if the layout does not tile the lines.
        """

        lines = list(lines)
        restored = []
        expected = 0
        for section in layout.sections:
            if section.start_line != expected:
                raise LayoutError(
                    "OCRRevise: Section starting at line {0} leaves a gap or overlap.".format(section.start_line)
                )
            chunk = lines[section.start_line:section.start_line + section.num_lines]
            if len(chunk) != section.num_lines:
                raise LayoutError("OCRRevise: Section starting at line {0} runs past the document.".format(section.start_line))
            restored.extend(self.invertColumnize(chunk, section.heights))
            expected += section.num_lines
        if expected != len(lines):
            raise LayoutError("OCRRevise: Layout covers {0} of {1} lines.".format(expected, len(lines)))
        return restored

    def applyLayout(self, lines, layout):
        """Re-applies a recorded layout to single-column lines."""

        lines = list(lines)
        out = []
        for section in layout.sections:
            chunk = lines[section.start_line:section.start_line + section.num_lines]
            if section.columns > 1:
                out.extend(self._interleave(chunk, list(section.heights)))
            else:
                out.extend(chunk)
        return out
