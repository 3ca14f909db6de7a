import itertools
import json
import random

import pytest

from fiberlog import FourTuple, KnowledgeBase, Session, parse_domain


def T(frm, rel, domain, to):
    return FourTuple(frm, rel, parse_domain(domain), to)


BIOLOGY_BUSINESS = [
    T("Apple", "is_a", "@Biology", "Fruit"),
    T("Fruit", "is_a", "@Biology", "Plant_Product"),
    T("Plant_Product", "is_a", "@Biology", "Organic_Matter"),
    T("Apple", "is_a", "@Business", "Company"),
    T("Company", "is_a", "@Business", "Corporation"),
]

PHYSICS = [
    T("Atom", "is_a", "@Physics", "Particle"),
    T("Wave", "contrasts_with", "@Physics", "Particle"),
]

META_TYPING = [
    T("is_a", "has_property", "@Meta@Logic", "monotone"),
    T("requires", "has_property", "@Meta@Logic", "monotone"),
    T("contrasts_with", "has_property", "@Meta@Logic", "non_monotone"),
    T("analogous_to", "has_property", "@Meta@Logic", "non_monotone"),
]

METEOROLOGY_CHAIN = ["Dark_Clouds", "Cloud_Formation", "Charge_Separation", "Lightning", "Thunder"]
METEOROLOGY = [T(a, "causes", "@Meteorology", b) for a, b in zip(METEOROLOGY_CHAIN, METEOROLOGY_CHAIN[1:])]

ICD = [
    T("Viral_Pneumonia", "is_a", "@ICD11@Respiratory@Anatomical", "Respiratory_Disease"),
    T("Viral_Pneumonia", "is_a", "@ICD11@Infectious@Etiological", "Infectious_Disease"),
    T("Viral_Pneumonia", "is_a", "@ICD11@Acute@Manifestation", "Acute_Condition"),
]

CBT = [
    T("catastrophizing", "causes", "@CBT@Session1@Turn3", "avoidance"),
    T("avoidance", "causes", "@CBT@Session1@Turn3", "isolation"),
    T("reality_testing", "weakens", "@CBT@Session2@Turn1", "catastrophizing"),
]


@pytest.fixture
def bio_kb():
    return KnowledgeBase(BIOLOGY_BUSINESS)


@pytest.fixture
def physics_session():
    return Session(KnowledgeBase(PHYSICS + META_TYPING))


@pytest.fixture
def weather_session():
    return Session(KnowledgeBase(METEOROLOGY))


def write_jsonl(path, records):
    path.write_text("".join(json.dumps(r.to_json()) + "\n" for r in records))
    return path


# independent oracles

def reach_fixpoint(edges):
    """All (a, b) with a path of one or more edges, by naive relational fixpoint."""
    edges = set(edges)
    reach = set(edges)
    while True:
        new = {(a, d) for (a, b) in reach for (c, d) in edges if b == c} - reach
        if not new:
            return reach
        reach |= new


def has_cycle(edges):
    return any(a == b for a, b in reach_fixpoint(edges))


def random_dag(rng, n_nodes, p, prefix="N"):
    names = [f"{prefix}{i}" for i in range(n_nodes)]
    rank = list(range(n_nodes))
    rng.shuffle(rank)
    edges = [
        (names[rank[i]], names[rank[j]])
        for i, j in itertools.combinations(range(n_nodes), 2)
        if rng.random() < p
    ]
    return names, edges


@pytest.fixture
def rng():
    return random.Random(20240611)
