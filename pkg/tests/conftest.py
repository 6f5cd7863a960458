from pathlib import Path

import pytest

from aspectsum import (TrainConfig, load_aspect_specs, load_corpus,
                       load_embeddings, save_model, train)
from aspectsum.evaluation import corpus_silver_labels

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def hotel_specs():
    return load_aspect_specs(FIXTURES / "hotel_aspects.jsonl")


@pytest.fixture(scope="session")
def hotel_corpus(hotel_specs):
    return load_corpus(FIXTURES / "hotel_reviews.jsonl", hotel_specs, domain="hotels")


@pytest.fixture(scope="session")
def hotel_table():
    return load_embeddings(FIXTURES / "hotel_embeddings_16d.txt")


@pytest.fixture(scope="session")
def hotel_train_config():
    # small but long enough that ranking tests see aspect-aware scores
    return TrainConfig(learning_rate=5e-3, steps=400, heads=4, warmup_steps=40,
                       seed=0, log_every=100)


@pytest.fixture(scope="session")
def hotel_model(hotel_corpus, hotel_table, hotel_train_config):
    labels = corpus_silver_labels(hotel_corpus)
    return train(hotel_corpus, labels, hotel_table, hotel_train_config)


@pytest.fixture(scope="session")
def hotel_model_path(hotel_model, tmp_path_factory):
    path = tmp_path_factory.mktemp("model") / "hotel.model"
    save_model(hotel_model, path)
    return path
