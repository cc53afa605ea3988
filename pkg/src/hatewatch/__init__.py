"""hatewatch: multilingual hate / abusive speech recognition toolkit.

Corpus harmonization, social-text normalization, from-scratch TF-IDF +
logistic regression, a small CNN-BiLSTM on a hand-rolled tensor engine,
language routing, a feedback/retrain hub, a REST moderation service, and
CLI tooling — for English, Hindi, and code-mixed Hindi.
"""

__version__ = "0.1.0"

__all__ = ["__version__"]
