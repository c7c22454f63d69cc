"""Function labeling: event extraction, exact decoding, category choice."""

import itertools
import math
import random

import pytest

from treewerk.labeler import (
    LabelerModel,
    emission_log_probability,
    extract_events,
    label_phrase,
    score_children,
    train_labeler,
    train_labeler_events,
)
from treewerk.markov import BOUNDARY, NEG_INF

from conftest import baecker_graph, make_graph

LABELS = ["HD", "MO", "OA", "SB"]
CHILD_TAGS = ["ART", "NN", "VVFIN", "NP", "PP"]


def random_events(rng, n_categories=3, n_events=30):
    events = []
    for _ in range(n_events):
        category = f"C{rng.randint(1, n_categories)}"
        length = rng.randint(1, 4)
        pairs = tuple(
            (rng.choice(CHILD_TAGS), rng.choice(LABELS)) for _ in range(length)
        )
        events.append((category, pairs))
    return events


def brute_force_labels(model, category, child_tags):
    """Score every label sequence directly from the model tables."""
    phrase = model.models[category]
    best = None
    for labels in itertools.product(phrase.labels, repeat=len(child_tags)):
        lp = 0.0
        context = (BOUNDARY,) * model.order
        for label, tag in zip(labels, child_tags):
            lp += phrase.transitions.log_probability(context, label)
            lp += emission_log_probability(model, phrase, label, tag)
            context = (context + (label,))[-model.order :]
        if best is None or lp > best[1] + 1e-12:
            best = (labels, lp)
    return best


def brute_force_category(model, child_tags):
    """Best posterior category: sequence score plus log prior, ties alphabetical."""
    best = None
    for category in model.categories():
        _, lp = brute_force_labels(model, category, child_tags)
        score = lp + (math.log(model.prior(category)) if model.use_priors else 0.0)
        if best is None or score > best[1] + 1e-12:
            best = (category, score)
    return best[0]


# -- event extraction ------------------------------------------------------


def test_events_follow_leftmost_child_order(baecker):
    events = extract_events([baecker])
    # the crossing VP starts at token 0, so it precedes the finite verb
    assert events == [
        ("VP", (("NN", "PD"), ("ADV", "MO"), ("VAINF", "HD"))),
        ("S", (("VP", "OC"), ("VVFIN", "HD"), ("PPER", "SB"))),
    ]


def test_events_reject_ill_formed_graph():
    bad = make_graph(
        "x", [("a", "NN")], {500: "NP"}, {0: 500, 500: -1}, {0: "HD", 500: "--"}
    )
    broken = make_graph(
        "x", [("a", "NN")], {500: "NP"}, {0: -1, 500: -1}, {0: "--", 500: "--"}
    )
    # 500 has no children
    with pytest.raises(ValueError, match="ill-formed"):
        extract_events([broken])
    assert extract_events([bad]) == [("NP", (("NN", "HD"),))]


def test_train_rejects_empty_events():
    with pytest.raises(ValueError):
        train_labeler_events([])


def test_priors_sum_to_one():
    rng = random.Random(7)
    model = train_labeler_events(random_events(rng))
    assert math.isclose(sum(model.prior(c) for c in model.categories()), 1.0)


def test_emission_distribution_is_proper():
    rng = random.Random(8)
    model = train_labeler_events(random_events(rng))
    for category in model.categories():
        phrase = model.models[category]
        for label in phrase.labels:
            mass = sum(
                math.exp(emission_log_probability(model, phrase, label, tag))
                for tag in model.child_alphabet
            )
            unseen = math.exp(
                emission_log_probability(model, phrase, label, "NEVER-SEEN")
            )
            assert math.isclose(mass + unseen, 1.0, abs_tol=1e-9)


# -- decoding --------------------------------------------------------------


def test_score_children_matches_enumeration():
    rng = random.Random(9)
    for trial in range(40):
        model = train_labeler_events(random_events(rng))
        category = rng.choice(model.categories())
        length = rng.randint(1, 4)
        tags = [rng.choice(CHILD_TAGS + ["UNSEEN"]) for _ in range(length)]
        labels, lp = score_children(model, category, tags)
        want_labels, want_lp = brute_force_labels(model, category, tags)
        assert labels == want_labels
        assert math.isclose(lp, want_lp, abs_tol=1e-9)


def test_label_phrase_category_matches_posterior():
    rng = random.Random(10)
    for trial in range(40):
        use_priors = trial % 2 == 0
        model = train_labeler_events(random_events(rng), use_priors=use_priors)
        length = rng.randint(1, 4)
        tags = [rng.choice(CHILD_TAGS) for _ in range(length)]
        result = label_phrase(model, tags)
        assert result.category == brute_force_category(model, tags)


def test_known_category_agrees_with_score_children():
    rng = random.Random(11)
    model = train_labeler_events(random_events(rng))
    tags = ["NN", "VVFIN"]
    for category in model.categories():
        result = label_phrase(model, tags, known_category=category)
        labels, lp = score_children(model, category, tags)
        assert result.category == category
        assert result.category_reliable is True
        assert result.labels == labels
        assert result.log_probability == lp


def test_log_probability_excludes_prior():
    rng = random.Random(12)
    model = train_labeler_events(random_events(rng), use_priors=True)
    tags = ["NN"]
    result = label_phrase(model, tags)
    _, lp = score_children(model, result.category, tags)
    assert math.isclose(result.log_probability, lp, abs_tol=1e-12)


def test_category_tie_goes_alphabetically_first():
    # two structurally identical categories: scores tie exactly
    events = [("XA", (("NN", "HD"),)), ("XB", (("NN", "HD"),))]
    model = train_labeler_events(events)
    result = label_phrase(model, ["NN"])
    assert result.category == "XA"


# -- reliability -----------------------------------------------------------


def test_single_category_is_reliable():
    model = train_labeler_events([("NP", (("NN", "HD"),))])
    result = label_phrase(model, ["NN"])
    assert result.category == "NP"
    assert result.category_reliable is True


def test_label_reliability_flags_differing_positions():
    rng = random.Random(13)
    for trial in range(30):
        model = train_labeler_events(random_events(rng))
        category = rng.choice(model.categories())
        tags = [rng.choice(CHILD_TAGS) for _ in range(rng.randint(1, 4))]
        loose = label_phrase(model, tags, known_category=category, threshold=0.0)
        assert loose.label_reliable == (True,) * len(tags)
        strict = label_phrase(
            model, tags, known_category=category, threshold=1e6
        )
        # with an absurd threshold only positions the runner-up agrees on stay reliable
        phrase = model.models[category]
        if len(phrase.labels) ** len(tags) > 1:
            assert not all(strict.label_reliable) or strict.labels == loose.labels


def test_threshold_monotonicity():
    rng = random.Random(14)
    model = train_labeler_events(random_events(rng))
    tags = ["NN", "VVFIN", "ART"]
    thresholds = [0.0, 0.5, 1.0, 2.0, 5.0, 20.0]
    flag_counts = []
    for t in thresholds:
        r = label_phrase(model, tags, threshold=t)
        flag_counts.append(sum(1 for x in r.label_reliable if not x))
    assert flag_counts == sorted(flag_counts)


def test_negative_threshold_rejected():
    model = train_labeler_events([("NP", (("NN", "HD"),))])
    with pytest.raises(ValueError):
        label_phrase(model, ["NN"], threshold=-1.0)


# -- errors ----------------------------------------------------------------


def test_unknown_category_rejected():
    model = train_labeler_events([("NP", (("NN", "HD"),))])
    with pytest.raises(ValueError, match="no model for category"):
        score_children(model, "VP", ["NN"])
    with pytest.raises(ValueError, match="no model for category"):
        label_phrase(model, ["NN"], known_category="VP")


def test_empty_children_rejected():
    model = train_labeler_events([("NP", (("NN", "HD"),))])
    with pytest.raises(ValueError, match="no children"):
        score_children(model, "NP", [])
    with pytest.raises(ValueError, match="no children"):
        label_phrase(model, [])


def test_train_from_treebank(baecker):
    model = train_labeler([baecker])
    assert model.categories() == ("S", "VP")
    labels, _ = score_children(model, "VP", ["NN", "ADV", "VAINF"])
    assert labels == ("PD", "MO", "HD")
