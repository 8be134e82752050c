import pytest
from OCRRevise import OCRRevise as ocr
from tests.mock_responses import MockCorpus, MockResponses


@pytest.fixture
def toolkit():
    return ocr.OCRRevise()


@pytest.fixture
def toolkit_from_env(tmp_path, monkeypatch):
    profilePath = tmp_path / "profile.cfg"
    profilePath.write_text(MockResponses.mock_profile, encoding="utf-8")
    confusionPath = tmp_path / "confusion.txt"
    confusionPath.write_text(MockResponses.mock_confusion, encoding="utf-8")
    promptPath = tmp_path / "prompt.txt"
    promptPath.write_text("Fix the OCR errors.\n", encoding="utf-8")

    monkeypatch.setenv("OCRREVISE_PROFILE", str(profilePath))
    monkeypatch.setenv("OCRREVISE_SEED", "7")
    monkeypatch.setenv("OCRREVISE_CONFUSION", str(confusionPath))
    monkeypatch.setenv("OCRREVISE_PROMPT", str(promptPath))

    return ocr.OCRRevise()


@pytest.fixture
def profile(toolkit):
    return toolkit.profile.defaultProfile(master_seed=2024)


@pytest.fixture(scope="session")
def corpus():
    return MockCorpus.documents(40, seed=3)


@pytest.fixture(scope="session")
def trained():
    """Models trained on a 200-document corpus, with the corpus itself."""

    documents = MockCorpus.documents(200, seed=5)
    toolkit = ocr.OCRRevise()
    return documents, toolkit.corrector.trainModels(documents)


@pytest.fixture(scope="session")
def synthesized(trained):
    """Pairs synthesized from the trained corpus at the default rates, with their corrections."""

    documents, models = trained
    toolkit = ocr.OCRRevise()
    profile = toolkit.profile.defaultProfile(master_seed=2024)
    pairs = list(toolkit.pipeline.synthesize(documents, profile))
    items = [(pair.id, pair.contaminated) for pair in pairs]
    corrected = {
        docId: correction.text
        for docId, correction in toolkit.corrector.correctMany(items, models, profile_hint=profile)
    }
    return pairs, corrected
