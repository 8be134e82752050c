import dataclasses
import logging

from ..common.common_funcs import CommonFuncs
from ..common.types import (
    KIND_CATEGORY,
    RATE_KINDS,
    ContaminationProfile,
    ErrorCategory,
)
from ..exceptions import ProfileFormatError, ProfileValidationError

_FLOAT_FIELDS = tuple(RATE_KINDS) + ("p_multicolumn_section",)
_INT_FIELDS = ("line_width", "section_lines_min", "section_lines_max", "master_seed")
_EXCLUSIVE_CHAR_FIELDS = ("del_char", "sub_char", "trans_char")
_MAX_SEED = 2 ** 64


class ProfileApi:
    def __init__(self, common_funcs: CommonFuncs):
        self.common_funcs = common_funcs


    def defaultProfile(self, master_seed=0):
        """Returns the default contamination profile.

        Args:
            master_seed (int): The master seed of the profile. Defaults to 0.

        Returns:
            ContaminationProfile: The profile with the default error rates and layout parameters.
        """

        return ContaminationProfile(master_seed=master_seed)

    def loadProfile(self, path):
        """Loads a contamination profile from a ``key = value`` file.

        Keys must match the profile's field names. Fields missing from the file take
        their default values, so an empty file yields the default profile.

        Args:
            path (str): Path of the profile file.

        Returns:
            ContaminationProfile: The validated profile.

        Raises:
            ProfileFormatError: Raised if a line cannot be parsed or names an unknown field.
            ProfileValidationError: Raised if the resulting profile violates an invariant.

        Example:
            >>> from OCRRevise import OCRRevise as ocr
            >>> toolkit = ocr.OCRRevise()
            >>> profile = toolkit.profile.loadProfile("profiles/newspapers.cfg")
        """

        try:
            with open(path, encoding="utf-8") as f:
                text = f.read()
        except OSError:
            logging.error("OCRRevise: Could not read the profile file {path}.".format(path=path))
            raise

        return self.parseProfile(text, source=path)

    def parseProfile(self, text, source="<profile>"):
        """Parses profile file contents. See ``loadProfile``."""

        known = ContaminationProfile.fieldNames()
        values = {}
        for lineNumber, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ProfileFormatError(
                    "OCRRevise: {source}, line {line}: expected 'key = value', got {raw!r}.".format(
                        source=source, line=lineNumber, raw=raw
                    )
                )
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in known:
                raise ProfileFormatError(
                    "OCRRevise: {source}, line {line}: unknown field {key!r}.".format(
                        source=source, line=lineNumber, key=key
                    )
                )
            if key in values:
                raise ProfileFormatError(
                    "OCRRevise: {source}, line {line}: field {key!r} given twice.".format(
                        source=source, line=lineNumber, key=key
                    )
                )
            values[key] = self._parseValue(key, value, source, lineNumber)

        profile = ContaminationProfile(**values)
        self.checkProfile(profile)
        return profile

    def _parseValue(self, key, value, source, lineNumber):
        try:
            if key in _FLOAT_FIELDS:
                return float(value)
            if key in _INT_FIELDS:
                return int(value)
            if not value:
                return frozenset()
            return frozenset(int(part) for part in value.split(","))
        except ValueError:
            raise ProfileFormatError(
                "OCRRevise: {source}, line {line}: invalid value {value!r} for field {key!r}.".format(
                    source=source, line=lineNumber, value=value, key=key
                )
            )

    def formatProfile(self, profile):
        """Renders a profile in the ``key = value`` file format, keys in field order."""

        lines = []
        for name in ContaminationProfile.fieldNames():
            value = getattr(profile, name)
            if name == "allowed_columns":
                rendered = ",".join(str(c) for c in sorted(value))
            elif name in _FLOAT_FIELDS:
                rendered = repr(float(value))
            else:
                rendered = str(int(value))
            lines.append("{name} = {value}".format(name=name, value=rendered))
        return "\n".join(lines) + "\n"

    def writeProfile(self, profile, path):
        """Writes a profile to ``path`` so that ``loadProfile`` reads it back unchanged."""

        with open(path, "w", encoding="utf-8") as f:
            f.write(self.formatProfile(profile))

    def validateProfile(self, profile):
        """Checks the invariants of a contamination profile.

        Args:
            profile (ContaminationProfile): The profile to check.

        Returns:
            list: The violations, each naming the offending field. Empty if the profile is valid.
        """

        violations = []
        for name in _FLOAT_FIELDS:
            value = getattr(profile, name)
            if not 0.0 <= value <= 1.0:
                violations.append("{name} must be within [0, 1], got {value}".format(name=name, value=value))

        exclusive = sum(getattr(profile, name) for name in _EXCLUSIVE_CHAR_FIELDS)
        if exclusive > 1.0 + 1e-12:
            violations.append(
                "exclusive char rates exceed 1: del_char + sub_char + trans_char = {total}".format(total=exclusive)
            )

        if profile.line_width < 8:
            violations.append("line_width must be at least 8, got {0}".format(profile.line_width))
        if profile.section_lines_min < 1:
            violations.append("section_lines_min must be positive, got {0}".format(profile.section_lines_min))
        if profile.section_lines_max < 1:
            violations.append("section_lines_max must be positive, got {0}".format(profile.section_lines_max))
        if profile.section_lines_min > profile.section_lines_max:
            violations.append(
                "section_lines_min ({0}) exceeds section_lines_max ({1})".format(
                    profile.section_lines_min, profile.section_lines_max
                )
            )

        if not set(profile.allowed_columns) <= {2, 3}:
            violations.append(
                "allowed_columns must be drawn from {{2, 3}}, got {0}".format(sorted(profile.allowed_columns))
            )
        if not profile.allowed_columns and profile.p_multicolumn_section > 0:
            violations.append("allowed_columns is empty while p_multicolumn_section is positive")

        if not 0 <= profile.master_seed < _MAX_SEED:
            violations.append("master_seed must be an unsigned 64-bit integer, got {0}".format(profile.master_seed))

        return violations

    def checkProfile(self, profile):
        """Raises ``ProfileValidationError`` if ``profile`` violates an invariant."""

        violations = self.validateProfile(profile)
        if violations:
            raise ProfileValidationError(
                "OCRRevise: Invalid contamination profile: " + "; ".join(violations),
                violations=violations,
            )
        return profile

    def withSeed(self, profile, master_seed):
        return self.checkProfile(dataclasses.replace(profile, master_seed=int(master_seed)))

    def singleCategoryProfile(self, category, base=None):
        """Returns a profile that injects only one category of the error taxonomy.

        The rates of the chosen category are kept from ``base``; every other rate is set
        to zero. Multi-column conversion is kept only for the column reading order category.

        Args:
            category (ErrorCategory or str): The category to keep, e.g. "segmentation".
            base (ContaminationProfile): The profile to take rates from. Defaults to the default profile.

        Returns:
            ContaminationProfile: The single-category profile.
        """

        category = ErrorCategory(category)
        base = base if base is not None else self.defaultProfile()
        changes = {
            name: 0.0 for name, kind in RATE_KINDS.items() if KIND_CATEGORY[kind] != category
        }
        if category != ErrorCategory.COLUMN_READING_ORDER:
            changes["p_multicolumn_section"] = 0.0
        return dataclasses.replace(base, **changes)

    def scaleRates(self, profile, alpha):
        """Scales the eight granular error rates by ``alpha``.

        Each rate is clamped to [0, 1]; if the three exclusive character rates would sum
        past 1 they are rescaled proportionally to sum to exactly 1.
        """

        scaled = {name: min(1.0, max(0.0, rate * alpha)) for name, rate in profile.rates().items()}
        exclusive = sum(scaled[name] for name in _EXCLUSIVE_CHAR_FIELDS)
        if exclusive > 1.0:
            for name in _EXCLUSIVE_CHAR_FIELDS:
                scaled[name] = scaled[name] / exclusive
        return dataclasses.replace(profile, **scaled)
