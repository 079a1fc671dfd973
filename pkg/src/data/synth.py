# TableGen Synthetic Corpora
"""
Deterministic templated text-table corpora.

"game": a short basketball report with a Team table and a Player table,
both with row and column headers. Entity aliases, distractor sentences and
omitted facts make the extraction non-trivial.

"profile": a restaurant description with one two-column attribute/value
table that has column headers only.
"""

import logging
import random
from dataclasses import dataclass
from typing import Dict, Final, List, Sequence, Tuple

from ..tables.table import HeaderMode, Table
from .dataset import DatasetRecord

logger = logging.getLogger(__name__)

DOMAINS: Final[Tuple[str, ...]] = ("game", "profile")


@dataclass(frozen=True)
class SynthConfig:
    """
    Corpus generator settings. Rates are probabilities; ranges are
    inclusive (low, high).
    """

    n_examples: int = 1000
    domain: str = "game"

    # Players per game
    n_entities_range: Tuple[int, int] = (2, 5)

    # Stat columns per table
    n_stat_types_range: Tuple[int, int] = (2, 4)

    distractor_sentence_rate: float = 0.3
    synonym_rate: float = 0.3

    # Fraction of gold cells left out of the text and emptied in the table
    omission_rate: float = 0.1

    seed: int = 42

    def validate(self) -> None:
        if self.n_examples < 0:
            raise ValueError(f"n_examples must be >= 0, got {self.n_examples}.")
        if self.domain not in DOMAINS:
            raise ValueError(f"domain must be one of {DOMAINS}, got '{self.domain}'.")
        for name in ("distractor_sentence_rate", "synonym_rate", "omission_rate"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value}.")
        low, high = self.n_entities_range
        if not 1 <= low <= high <= len(PLAYER_LAST_NAMES):
            raise ValueError(f"n_entities_range must satisfy 1 <= low <= high <= "
                             f"{len(PLAYER_LAST_NAMES)}, got {self.n_entities_range}.")
        low, high = self.n_stat_types_range
        limit = min(len(TEAM_STATS), len(PLAYER_STATS))
        if not 1 <= low <= high <= limit:
            raise ValueError(f"n_stat_types_range must satisfy 1 <= low <= high <= {limit}, "
                             f"got {self.n_stat_types_range}.")


# ============================================
# GAME DOMAIN VOCABULARY
# ============================================

# (city alias, canonical team name)
TEAMS: Final[Tuple[Tuple[str, str], ...]] = (
    ("Boston", "Celtics"), ("Miami", "Heat"), ("Chicago", "Bulls"), ("Denver", "Nuggets"),
    ("Phoenix", "Suns"), ("Dallas", "Mavericks"), ("Utah", "Jazz"), ("Orlando", "Magic"),
)

PLAYER_FIRST_NAMES: Final[Tuple[str, ...]] = (
    "Al", "Jayson", "Kyle", "Marcus", "Isaiah", "Jimmy", "Luka", "Devin", "Chris", "Nikola",
)
PLAYER_LAST_NAMES: Final[Tuple[str, ...]] = (
    "Horford", "Tatum", "Lowry", "Smart", "Thomas", "Butler", "Doncic", "Booker",
    "Paul", "Jokic", "Murray", "Durant",
)

# column header -> inclusive value range
TEAM_STATS: Final[Dict[str, Tuple[int, int]]] = {
    "Points": (80, 130), "Rebounds": (30, 55), "Assists": (15, 35),
    "Turnovers": (5, 20), "Wins": (10, 60), "Losses": (10, 60),
}
PLAYER_STATS: Final[Dict[str, Tuple[int, int]]] = {
    "Points": (0, 40), "Rebounds": (0, 15), "Assists": (0, 12),
    "Steals": (0, 5), "Blocks": (0, 5), "Minutes": (10, 40),
}

GAME_DISTRACTORS: Final[Tuple[str, ...]] = (
    "The attendance was {n} .",
    "The coach praised the defense after the game .",
    "The next game is on Friday .",
    "Fans waited {n} minutes to enter the arena .",
    "The arena was sold out .",
)

# ============================================
# PROFILE DOMAIN VOCABULARY
# ============================================

PROFILE_NAMES: Final[Tuple[str, ...]] = (
    "The Eagle", "Blue Spice", "The Mill", "Zizzi", "Aromi", "Cotto", "Giraffe", "The Punter",
)

# attribute -> (values, sentence template)
PROFILE_ATTRIBUTES: Final[Dict[str, Tuple[Tuple[str, ...], str]]] = {
    "food": (("Italian", "French", "Chinese", "Indian", "English", "Japanese"), "It serves {v} food ."),
    "area": (("riverside", "city centre"), "It is located in the {v} area ."),
    "price": (("cheap", "moderate", "high"), "The price is {v} ."),
    "rating": (("low", "average", "high"), "The rating is {v} ."),
    "near": (("Burger King", "Cafe Rouge", "The Bakers"), "It is near {v} ."),
    "family": (("yes", "no"), "It is family friendly : {v} ."),
}

PROFILE_DISTRACTORS: Final[Tuple[str, ...]] = (
    "The weather was pleasant .",
    "Parking is available nearby .",
    "It opened {n} years ago .",
)


# ============================================
# GENERATION
# ============================================

def _pick_columns(rng: random.Random, pool: Sequence[str], bounds: Tuple[int, int]) -> List[str]:
    """Random subset of the pool, kept in pool order."""
    chosen = set(rng.sample(list(pool), rng.randint(*bounds)))
    return [name for name in pool if name in chosen]


def _stat_sentence(subject: str, facts: Sequence[Tuple[str, str]]) -> str:
    clauses = [f"{value} {stat.lower()}" for stat, value in facts]
    if len(clauses) == 1:
        listed = clauses[0]
    else:
        listed = " , ".join(clauses[:-1]) + " and " + clauses[-1]
    return f"{subject} had {listed} ."


def _listing(names: Sequence[str]) -> str:
    if len(names) == 1:
        return names[0]
    return " , ".join(names[:-1]) + " and " + names[-1]


def _stat_rows(
    rng: random.Random,
    cfg: SynthConfig,
    entities: Sequence[Tuple[str, str]],
    columns: Sequence[str],
    ranges: Dict[str, Tuple[int, int]],
    sentences: List[str],
) -> List[List[str]]:
    """Fill one row per (canonical, alias) entity; mentioned facts go into `sentences`."""
    rows = []
    for canonical, alias in entities:
        row = [canonical]
        facts = []
        for stat in columns:
            value = str(rng.randint(*ranges[stat]))
            if rng.random() < cfg.omission_rate:
                row.append("")
            else:
                row.append(value)
                facts.append((stat, value))
        if facts:
            subject = alias if rng.random() < cfg.synonym_rate else canonical
            sentences.append(_stat_sentence(subject, facts))
        rows.append(row)
    return rows


def _distractors(rng: random.Random, cfg: SynthConfig, n_slots: int,
                 templates: Sequence[str]) -> List[str]:
    out = []
    for _ in range(n_slots):
        if rng.random() < cfg.distractor_sentence_rate:
            out.append(rng.choice(templates).format(n=rng.randint(2, 20000)))
    return out


def _game_record(rng: random.Random, cfg: SynthConfig) -> DatasetRecord:
    (home_city, home), (away_city, away) = rng.sample(list(TEAMS), 2)
    last_names = rng.sample(list(PLAYER_LAST_NAMES), rng.randint(*cfg.n_entities_range))
    players = [(f"{rng.choice(PLAYER_FIRST_NAMES)} {last}", last) for last in last_names]

    team_columns = _pick_columns(rng, list(TEAM_STATS), cfg.n_stat_types_range)
    player_columns = _pick_columns(rng, list(PLAYER_STATS), cfg.n_stat_types_range)

    sentences = [
        f"The {home} hosted the {away} .",
        f"{_listing([name for name, _ in players])} played .",
    ]
    team_rows = _stat_rows(rng, cfg, [(home, home_city), (away, away_city)],
                           team_columns, TEAM_STATS, sentences)
    player_rows = _stat_rows(rng, cfg, players, player_columns, PLAYER_STATS, sentences)
    sentences.extend(_distractors(rng, cfg, len(sentences), GAME_DISTRACTORS))
    rng.shuffle(sentences)

    tables = (
        Table.from_rows([[""] + team_columns] + team_rows, HeaderMode.BOTH, caption="Team"),
        Table.from_rows([[""] + player_columns] + player_rows, HeaderMode.BOTH, caption="Player"),
    )
    return DatasetRecord(text=" ".join(sentences), tables=tables)


def _profile_record(rng: random.Random, cfg: SynthConfig) -> DatasetRecord:
    name = rng.choice(PROFILE_NAMES)
    rows = [["attribute", "value"], ["name", name]]
    sentences = []
    for attribute, (values, template) in PROFILE_ATTRIBUTES.items():
        value = rng.choice(values)
        # an omitted attribute is absent from both text and table
        if rng.random() < cfg.omission_rate:
            continue
        rows.append([attribute, value])
        sentences.append(template.format(v=value))
    sentences.extend(_distractors(rng, cfg, len(sentences) + 1, PROFILE_DISTRACTORS))
    rng.shuffle(sentences)

    text = " ".join([f"The restaurant name is {name} ."] + sentences)
    return DatasetRecord(text=text, tables=(Table.from_rows(rows, HeaderMode.COL_ONLY),))


def generate_corpus(cfg: SynthConfig) -> List[DatasetRecord]:
    """
    Generate cfg.n_examples records. The output depends only on cfg.

    Raises:
        ValueError: Invalid configuration.
    """
    cfg.validate()
    rng = random.Random(cfg.seed)
    make = _game_record if cfg.domain == "game" else _profile_record
    records = [make(rng, cfg) for _ in range(cfg.n_examples)]
    logger.debug(f"Generated {len(records)} {cfg.domain} records with seed {cfg.seed}")
    return records
