from setuptools import setup, find_packages


with open("README.md") as f:
    long_description = f.read()

setup(
    name="OCRRevise",
    packages=find_packages(exclude=["tests", "tests.*"]),
    version="0.1.0",
    license="MIT",
    description="OCRRevise builds synthetic OCR error corpora and corrects and evaluates OCR'd text.",
    long_description=long_description,
    long_description_content_type="text/markdown",
    keywords=["OCR", "post-OCR correction", "data augmentation", "noisy channel", "BM25"],
    install_requires=["requests", "pandas", "numpy", "Levenshtein"],
    entry_points={
        "console_scripts": ["ocrrevise=OCRRevise.cli:main"],
    },
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Developers",
        "Intended Audience :: Science/Research",
        "Topic :: Text Processing :: Linguistic",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3.9",
    ],
)
