import os

from OCRRevise.channels.channels_api import ChannelsApi
from OCRRevise.common.common_funcs import CommonFuncs
from OCRRevise.corrector.corrector_api import CorrectorApi
from OCRRevise.exceptions import ProfileValidationError
from OCRRevise.layout.layout_api import LayoutApi
from OCRRevise.metrics.metrics_api import MetricsApi
from OCRRevise.pipeline.pipeline_api import PipelineApi
from OCRRevise.profile.profile_api import ProfileApi


class OCRRevise():
    """OCRRevise. Holds the tools to build, correct and evaluate OCR error corpora.

    Clean text is contaminated in two stages, first by simulated column reading-order
    errors and then by word and character level error channels, to build parallel
    pairs for training a reviser. A noisy-channel corrector revises OCR'd text, and the
    metrics measure the effect with CER/WER and BM25 retrieval recall.

    It can be instantiated either by arguments or by environment variables (if arguments
    are specified, they take precedence even when environment variables are set).

    Args:
        profile (str): Path of a contamination profile file. Defaults to the built-in profile.
        seed (int): Master seed, replacing the profile's ``master_seed``.
        confusion (str): Path of a confusion table file. Defaults to the built-in table.
        prompt (str): Path of a system prompt file for export. Defaults to the built-in prompt.
        timeout (int): Timeout in seconds for fetching corpora over HTTP. Defaults to 10.

    Examples:
        The OCRRevise class is the entry point to the toolkit. You can instantiate it like this:

            >>> from OCRRevise import OCRRevise as ocr
            >>> toolkit = ocr.OCRRevise(
            ...     profile="profiles/newspapers.cfg",
            ...     seed=42,
            ... )

        You might find it useful to specify environment variables to instantiate OCRRevise.
        To do so, you can set the following environment variables:

        * ``OCRREVISE_PROFILE``
        * ``OCRREVISE_SEED``
        * ``OCRREVISE_CONFUSION``
        * ``OCRREVISE_PROMPT``

        Now you can instantiate OCRRevise without passing any arguments:

            >>> from OCRRevise import OCRRevise as ocr
            >>> toolkit = ocr.OCRRevise()
    """

    def __init__(
            self,
            profile=None,
            seed=None,
            confusion=None,
            prompt=None,
            timeout=10
        ):
        self._profilePath = profile if profile is not None else os.getenv("OCRREVISE_PROFILE")
        self._seed = seed if seed is not None else os.getenv("OCRREVISE_SEED")
        self._confusionPath = confusion if confusion is not None else os.getenv("OCRREVISE_CONFUSION")
        self._promptPath = prompt if prompt is not None else os.getenv("OCRREVISE_PROMPT")

        self.common_funcs = CommonFuncs(
            timeout = timeout
        )

        self.profile = ProfileApi(
            common_funcs = self.common_funcs
        )
        if self._profilePath:
            self.contamination_profile = self.profile.loadProfile(self._profilePath)
        else:
            self.contamination_profile = self.profile.defaultProfile()
        if self._seed is not None and self._seed != "":
            self.contamination_profile = self.profile.withSeed(self.contamination_profile, self._parseSeed(self._seed))

        self.channels = ChannelsApi(
            common_funcs = self.common_funcs
        )
        if self._confusionPath:
            self.channels.confusion = self.channels.loadConfusionTable(self._confusionPath)
        self.confusion = self.channels.confusion

        self.layout = LayoutApi(
            common_funcs = self.common_funcs
        )

        self.pipeline = PipelineApi(
            common_funcs = self.common_funcs,
            layout_api = self.layout,
            channels_api = self.channels
        )
        if self._promptPath:
            self.prompt_template = self.pipeline.loadPromptTemplate(self._promptPath)
        else:
            self.prompt_template = self.pipeline.defaultPromptTemplate()

        self.corrector = CorrectorApi(
            common_funcs = self.common_funcs,
            layout_api = self.layout,
            confusion = self.confusion
        )

        self.metrics = MetricsApi(
            common_funcs = self.common_funcs
        )

    def _parseSeed(self, seed):
        try:
            return int(seed)
        except (TypeError, ValueError):
            raise ProfileValidationError(
                "OCRRevise: The seed must be an unsigned 64-bit integer, got {0!r}.".format(seed),
                violations=["master_seed must be an unsigned 64-bit integer, got {0!r}".format(seed)],
            )
