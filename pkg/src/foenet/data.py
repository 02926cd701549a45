"""Synthetic TD/TI embeddings, verification trials and their on-disk format.

The generator stands in for two pre-trained encoders. Each speaker has a latent
voice vector ``z`` drawn around one of two gender centres; an utterance is seen
by the TD encoder as ``z @ A_td + noise`` and by the TI encoder as
``z @ A_ti + noise``. Because both views share ``z``, a differential computed on
one side carries information about the other side.

Trials are stored one JSON object per line::

    {"trial_id": "...", "label": 1, "speaker_id": "...", "gender": "A",
     "avail": {"spk_td": true, "u_td": false, "spk_ti": true, "u_ti": true},
     "e_spk_td": [...], "e_spk_ti": [...], "e_u_ti": [...],
     "utterance_id": "...", "utt_speaker_id": "...", "m": 7,
     "gender_pairing": "same"}

Embedding fields are written only when the vector exists. Floats are written
with Python's shortest round-trip repr, so a load after a save is bit exact.
"""

import dataclasses
import hashlib
import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

import numpy as np

from .exceptions import (
    BothSidesAbsent,
    DimensionMismatch,
    EmptyEnrollment,
    InsufficientSpeakers,
    InvalidParameter,
    SchemaError,
    TooFewTrials,
)
from .numerics import seeded_rng

logger = logging.getLogger(__name__)

GENDERS = ("A", "B")
SCENARIO_TAGS = ("both_present", "td_absent", "ti_absent")
EMBEDDING_FIELDS = ("e_spk_td", "e_u_td", "e_spk_ti", "e_u_ti")


def _same(a, b):
    if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
        if a is None or b is None:
            return False
        return a.shape == b.shape and bool(np.array_equal(a, b))
    return a == b


class _FieldEq:
    """Field-wise equality that understands numpy arrays."""

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return all(
            _same(getattr(self, f.name), getattr(other, f.name))
            for f in dataclasses.fields(self)
        )


# ---------------------------------------------------------------------------
# availability
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Availability:
    spk_td: bool = True
    u_td: bool = True
    spk_ti: bool = True
    u_ti: bool = True

    @property
    def td_complete(self):
        return self.spk_td and self.u_td

    @property
    def ti_complete(self):
        return self.spk_ti and self.u_ti

    @property
    def scenario(self):
        if self.td_complete and self.ti_complete:
            return "both_present"
        return "td_absent" if self.ti_complete else "ti_absent"

    def validate(self):
        if not (self.td_complete or self.ti_complete):
            raise BothSidesAbsent(f"neither subsystem has both embeddings: {self}")
        return self

    def as_dict(self):
        return dataclasses.asdict(self)


# Representative rows of the missing-input table. Every "TD absent" row there
# is either a missing wakeword segment (u_td) or a missing TD enrolment (spk_td).
SCENARIOS = {
    "both_present": Availability(),
    "td_absent": Availability(u_td=False),
    "td_profile_absent": Availability(spk_td=False),
    "ti_absent": Availability(u_ti=False),
}


# ---------------------------------------------------------------------------
# records
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class Speaker(_FieldEq):
    speaker_id: str
    gender: str
    household_id: str
    latent: np.ndarray


@dataclass(eq=False)
class UtteranceEmbeddings(_FieldEq):
    utterance_id: str
    speaker_id: str
    e_td: Optional[np.ndarray] = None
    e_ti: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.e_td is None and self.e_ti is None:
            raise InvalidParameter(f"utterance {self.utterance_id} has no embeddings")


@dataclass(eq=False)
class SpeakerProfile(_FieldEq):
    speaker_id: str
    m: int
    e_spk_td: Optional[np.ndarray] = None
    e_spk_ti: Optional[np.ndarray] = None


@dataclass(eq=False)
class TrialRecord(_FieldEq):
    trial_id: str
    label: int
    availability: Availability
    profile: SpeakerProfile
    utterance: UtteranceEmbeddings
    gender: str = "A"
    gender_pairing: str = "n/a"

    @property
    def scenario(self):
        return self.availability.scenario


@dataclass
class DatasetSplit:
    train: list
    valid: list
    split_seed: int


@dataclass
class SynthConfig:
    """Knobs of the synthetic population. Loadable from a flat JSON object."""

    n_speakers: int = 200
    n_test_speakers: int = 100
    latent_dim: int = 16
    td_dim: int = 64
    ti_dim: int = 64
    utterances_per_speaker: int = 20
    enroll_min: int = 4
    enroll_max: int = 10
    test_per_speaker: int = 10
    household_size: int = 2
    gender_shift: float = 1.5
    # TD works on a short wakeword segment, so it is the noisier view
    sigma_td: float = 2.5
    sigma_ti: float = 1.6
    negative_strategy: str = "same_gender"
    train_ratio: float = 0.85

    def validate(self):
        for name in ("n_speakers", "latent_dim", "td_dim", "ti_dim",
                     "utterances_per_speaker", "enroll_min", "enroll_max",
                     "test_per_speaker", "household_size"):
            if getattr(self, name) <= 0:
                raise InvalidParameter(f"{name} must be positive")
        if self.n_test_speakers < 0:
            raise InvalidParameter("n_test_speakers must be >= 0")
        if self.enroll_min > self.enroll_max:
            raise InvalidParameter("enroll_min > enroll_max")
        if self.enroll_max + self.test_per_speaker > self.utterances_per_speaker:
            raise InvalidParameter(
                "utterances_per_speaker must cover enroll_max + test_per_speaker")
        if self.sigma_td < 0 or self.sigma_ti < 0:
            raise InvalidParameter("noise scales must be >= 0")
        if self.negative_strategy not in ("same_gender", "random"):
            raise InvalidParameter(f"unknown negative_strategy {self.negative_strategy!r}")
        if not 0 < self.train_ratio < 1:
            raise InvalidParameter("train_ratio must be in (0, 1)")
        return self

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise InvalidParameter(f"unknown config keys: {sorted(unknown)}")
        return cls(**d).validate()

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self):
        return dataclasses.asdict(self)

    def digest(self):
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


@dataclass
class Population:
    speakers: list
    utterances: dict          # speaker_id -> list[UtteranceEmbeddings]
    enroll_counts: dict       # speaker_id -> number of enrolment utterances
    proj_td: np.ndarray       # (latent_dim, td_dim)
    proj_ti: np.ndarray       # (latent_dim, ti_dim)

    def subset(self, speaker_ids):
        keep = set(speaker_ids)
        return Population(
            speakers=[s for s in self.speakers if s.speaker_id in keep],
            utterances={k: v for k, v in self.utterances.items() if k in keep},
            enroll_counts={k: v for k, v in self.enroll_counts.items() if k in keep},
            proj_td=self.proj_td,
            proj_ti=self.proj_ti,
        )


# ---------------------------------------------------------------------------
# generation
# ---------------------------------------------------------------------------


def make_profile(utterances):
    """Elementwise mean of the enrolment embeddings.

    The mean is computed in exact rational arithmetic and rounded once, so it
    does not depend on the order of the utterances and ``M`` copies of ``v``
    give back ``v`` bit for bit.
    """
    if len(utterances) == 0:
        raise EmptyEnrollment("a profile needs at least one utterance")
    arrs = [np.asarray(u, dtype=np.float64) for u in utterances]
    shape = arrs[0].shape
    if len(shape) != 1 or any(a.shape != shape for a in arrs):
        raise DimensionMismatch("enrolment embeddings must be 1-D with equal dims")
    m = len(arrs)
    columns = np.stack(arrs).T.tolist()
    return np.array([float(sum(map(Fraction, col)) / m) for col in columns])


def generate_population(cfg, rng):
    cfg.validate()
    rng = seeded_rng(rng)
    n_total = cfg.n_speakers + cfg.n_test_speakers
    L = cfg.latent_dim

    proj_td = rng.standard_normal((L, cfg.td_dim)) / np.sqrt(L)
    proj_ti = rng.standard_normal((L, cfg.ti_dim)) / np.sqrt(L)
    direction = rng.standard_normal(L)
    direction /= np.linalg.norm(direction)
    centres = {"A": cfg.gender_shift * direction, "B": -cfg.gender_shift * direction}

    speakers, utterances, enroll_counts = [], {}, {}
    for i in range(n_total):
        sid = f"spk{i:05d}"
        gender = GENDERS[int(rng.integers(2))]
        latent = centres[gender] + rng.standard_normal(L)
        speakers.append(Speaker(sid, gender, f"hh{i // cfg.household_size:05d}", latent))

        n = cfg.utterances_per_speaker
        clean_td = latent @ proj_td
        clean_ti = latent @ proj_ti
        e_td = clean_td + cfg.sigma_td * rng.standard_normal((n, cfg.td_dim))
        e_ti = clean_ti + cfg.sigma_ti * rng.standard_normal((n, cfg.ti_dim))
        utterances[sid] = [
            UtteranceEmbeddings(f"{sid}-u{j:03d}", sid, e_td[j].copy(), e_ti[j].copy())
            for j in range(n)
        ]
        enroll_counts[sid] = int(rng.integers(cfg.enroll_min, cfg.enroll_max + 1))
    return Population(speakers, utterances, enroll_counts, proj_td, proj_ti)


def _profile_for(pop, speaker):
    sid = speaker.speaker_id
    m = pop.enroll_counts[sid]
    enrol = pop.utterances[sid][:m]
    if not enrol:
        raise EmptyEnrollment(f"speaker {sid} has no enrolment utterances")
    return SpeakerProfile(
        sid, m,
        make_profile([u.e_td for u in enrol]),
        make_profile([u.e_ti for u in enrol]),
    )


def build_trials(population, cfg, rng, prefix="t"):
    """One positive and one negative trial per held-out test utterance.

    Enrolment utterances (the first ``m`` of each speaker) build the profile;
    the next ``cfg.test_per_speaker`` are test utterances. A negative pairs the
    test utterance with the profile of a guest speaker from another household,
    of the same gender when ``cfg.negative_strategy == "same_gender"``.
    """
    rng = seeded_rng(rng)
    speakers = population.speakers
    if not speakers:
        raise InsufficientSpeakers("empty population")
    by_id = {s.speaker_id: s for s in speakers}
    profiles = {s.speaker_id: _profile_for(population, s) for s in speakers}

    same_gender = cfg.negative_strategy == "same_gender"
    pools = {}
    for g in GENDERS:
        members = [s for s in speakers if s.gender == g]
        if same_gender and members and len({s.household_id for s in members}) < 2:
            raise InsufficientSpeakers(f"gender {g} spans fewer than 2 households")
        pools[g] = members
    if not same_gender and len({s.household_id for s in speakers}) < 2:
        raise InsufficientSpeakers("population spans fewer than 2 households")

    trials = []
    for spk in speakers:
        sid = spk.speaker_id
        m = population.enroll_counts[sid]
        tests = population.utterances[sid][m:m + cfg.test_per_speaker]
        for utt in tests:
            trials.append(TrialRecord(
                trial_id=f"{prefix}{len(trials):06d}", label=1,
                availability=Availability(), profile=profiles[sid], utterance=utt,
                gender=spk.gender, gender_pairing="n/a",
            ))
            pool = pools[spk.gender] if same_gender else speakers
            candidates = [s for s in pool if s.household_id != spk.household_id]
            if not candidates:
                raise InsufficientSpeakers(f"no guest speaker available for {sid}")
            guest = candidates[int(rng.integers(len(candidates)))]
            trials.append(TrialRecord(
                trial_id=f"{prefix}{len(trials):06d}", label=0,
                availability=Availability(), profile=profiles[guest.speaker_id],
                utterance=utt, gender=by_id[guest.speaker_id].gender,
                gender_pairing="same" if guest.gender == spk.gender else "different",
            ))
    return trials


def apply_scenario_mask(trial, scenario):
    """Return a copy of ``trial`` carrying the availability flags of ``scenario``.

    Masked embeddings stay attached; downstream scoring must ignore them.
    """
    if isinstance(scenario, str):
        scenario = SCENARIOS[scenario]
    scenario.validate()
    return dataclasses.replace(trial, availability=scenario)


def split_indices(labels, ratio, rng, max_retries=100):
    """Random ``ratio`` / ``1 - ratio`` partition of ``range(len(labels))``.

    Re-draws (at most ``max_retries`` times) until the positive rate of both
    parts is within 5 percentage points of the overall rate, keeping the best
    draw otherwise.
    """
    labels = np.asarray(labels)
    n = len(labels)
    overall = labels.mean()
    n_train = min(max(int(round(ratio * n)), 1), n - 1)
    best, best_gap = None, np.inf
    for _ in range(max_retries):
        perm = rng.permutation(n)
        tr, va = perm[:n_train], perm[n_train:]
        gap = max(abs(labels[tr].mean() - overall), abs(labels[va].mean() - overall))
        if gap < best_gap:
            best, best_gap = (tr, va), gap
        if gap <= 0.05:
            break
    return best


def split_dataset(trials, ratio, rng, max_retries=100, min_trials=20):
    if not 0 < ratio < 1:
        raise InvalidParameter(f"ratio must be in (0, 1), got {ratio}")
    n = len(trials)
    if n < max(min_trials, 2):
        raise TooFewTrials(f"need at least {max(min_trials, 2)} trials, got {n}")
    seed = int(seeded_rng(rng).integers(2**63))
    tr, va = split_indices([t.label for t in trials], ratio, seeded_rng(seed), max_retries)
    return DatasetSplit([trials[i] for i in tr], [trials[i] for i in va], seed)


# ---------------------------------------------------------------------------
# JSON-Lines I/O
# ---------------------------------------------------------------------------


def _vec_to_json(v):
    return [float(x) for x in np.asarray(v, dtype=np.float64)]


def trial_to_dict(trial):
    d = {
        "trial_id": trial.trial_id,
        "label": int(trial.label),
        "speaker_id": trial.profile.speaker_id,
        "gender": trial.gender,
        "avail": trial.availability.as_dict(),
    }
    vectors = {
        "e_spk_td": trial.profile.e_spk_td,
        "e_u_td": trial.utterance.e_td,
        "e_spk_ti": trial.profile.e_spk_ti,
        "e_u_ti": trial.utterance.e_ti,
    }
    for name in EMBEDDING_FIELDS:
        if vectors[name] is not None:
            d[name] = _vec_to_json(vectors[name])
    d["utterance_id"] = trial.utterance.utterance_id
    d["utt_speaker_id"] = trial.utterance.speaker_id
    d["m"] = int(trial.profile.m)
    d["gender_pairing"] = trial.gender_pairing
    return d


def _vec_from_json(d, name, line):
    if name not in d:
        return None
    v = d[name]
    if not isinstance(v, list) or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v):
        raise SchemaError(f"{name} must be a list of numbers", line)
    arr = np.array(v, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise SchemaError(f"{name} contains non-finite values", line)
    return arr


def trial_from_dict(d, line=None):
    if not isinstance(d, dict):
        raise SchemaError("expected a JSON object", line)
    for key in ("trial_id", "label", "speaker_id", "avail"):
        if key not in d:
            raise SchemaError(f"missing field {key!r}", line)
    if d["label"] not in (0, 1) or isinstance(d["label"], bool):
        raise SchemaError(f"label must be 0 or 1, got {d['label']!r}", line)
    av = d["avail"]
    if not isinstance(av, dict) or set(av) != {"spk_td", "u_td", "spk_ti", "u_ti"} \
            or not all(isinstance(x, bool) for x in av.values()):
        raise SchemaError("avail must hold four booleans spk_td, u_td, spk_ti, u_ti", line)
    availability = Availability(**av)
    try:
        availability.validate()
    except BothSidesAbsent as exc:
        raise SchemaError(str(exc), line) from None

    vecs = {name: _vec_from_json(d, name, line) for name in EMBEDDING_FIELDS}
    if vecs["e_u_td"] is None and vecs["e_u_ti"] is None:
        raise SchemaError("trial has no utterance embedding", line)
    for side, flags in (("td", ("spk_td", "u_td")), ("ti", ("spk_ti", "u_ti"))):
        for flag, name in zip(flags, (f"e_spk_{side}", f"e_u_{side}")):
            if av[flag] and vecs[name] is None:
                raise SchemaError(f"{name} flagged available but missing", line)
    speaker_id = d["speaker_id"]
    utterance = UtteranceEmbeddings(
        d.get("utterance_id", f"{d['trial_id']}-u"),
        d.get("utt_speaker_id", speaker_id if d["label"] == 1 else ""),
        vecs["e_u_td"], vecs["e_u_ti"],
    )
    profile = SpeakerProfile(speaker_id, int(d.get("m", 0)), vecs["e_spk_td"], vecs["e_spk_ti"])
    return TrialRecord(
        trial_id=str(d["trial_id"]), label=int(d["label"]), availability=availability,
        profile=profile, utterance=utterance, gender=d.get("gender", "A"),
        gender_pairing=d.get("gender_pairing", "n/a"),
    )


def save_trials(path, trials):
    path = Path(path)
    with open(path, "w") as fh:
        for t in trials:
            fh.write(json.dumps(trial_to_dict(t), allow_nan=False))
            fh.write("\n")


def load_trials(path):
    trials = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                d = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"invalid JSON: {exc.msg}", lineno) from None
            trials.append(trial_from_dict(d, lineno))
    return trials


# ---------------------------------------------------------------------------
# dense views
# ---------------------------------------------------------------------------


@dataclass
class TrialArrays:
    """Column-stacked trial embeddings; absent vectors are stored as zeros.

    ``avail`` holds the four availability flags in the order
    ``spk_td, u_td, spk_ti, u_ti``.
    """

    spk_td: np.ndarray
    u_td: np.ndarray
    spk_ti: np.ndarray
    u_ti: np.ndarray
    avail: np.ndarray
    labels: Optional[np.ndarray] = None
    trial_ids: Optional[list] = field(default=None, repr=False)

    def __len__(self):
        return self.avail.shape[0]

    @property
    def td_dim(self):
        return self.spk_td.shape[1]

    @property
    def ti_dim(self):
        return self.spk_ti.shape[1]

    @property
    def td_ok(self):
        return self.avail[:, 0] & self.avail[:, 1]

    @property
    def ti_ok(self):
        return self.avail[:, 2] & self.avail[:, 3]

    @property
    def scenarios(self):
        tags = np.where(self.ti_ok, "td_absent", "ti_absent").astype(object)
        tags[self.td_ok & self.ti_ok] = "both_present"
        return tags

    def subset(self, idx):
        idx = np.asarray(idx)
        return TrialArrays(
            self.spk_td[idx], self.u_td[idx], self.spk_ti[idx], self.u_ti[idx],
            self.avail[idx],
            None if self.labels is None else self.labels[idx],
            None if self.trial_ids is None else [self.trial_ids[i] for i in np.arange(len(self))[idx]],
        )

    def with_avail(self, avail):
        return dataclasses.replace(self, avail=np.asarray(avail, dtype=bool))

    def validate(self):
        bad = ~(self.td_ok | self.ti_ok)
        if bad.any():
            raise BothSidesAbsent(f"{int(bad.sum())} trial(s) have neither subsystem complete")
        return self


def _dim_of(trials, attr_pairs, default):
    for t in trials:
        for owner, name in attr_pairs:
            v = getattr(getattr(t, owner), name)
            if v is not None:
                return len(v)
    if default is None:
        raise DimensionMismatch("cannot infer embedding dimension: no vector present")
    return default


def to_arrays(trials, td_dim=None, ti_dim=None):
    n = len(trials)
    td_dim = _dim_of(trials, (("profile", "e_spk_td"), ("utterance", "e_td")), td_dim)
    ti_dim = _dim_of(trials, (("profile", "e_spk_ti"), ("utterance", "e_ti")), ti_dim)
    out = {
        "spk_td": np.zeros((n, td_dim)), "u_td": np.zeros((n, td_dim)),
        "spk_ti": np.zeros((n, ti_dim)), "u_ti": np.zeros((n, ti_dim)),
    }
    avail = np.zeros((n, 4), dtype=bool)
    for i, t in enumerate(trials):
        a = t.availability
        avail[i] = (a.spk_td, a.u_td, a.spk_ti, a.u_ti)
        for key, v in (("spk_td", t.profile.e_spk_td), ("u_td", t.utterance.e_td),
                       ("spk_ti", t.profile.e_spk_ti), ("u_ti", t.utterance.e_ti)):
            if v is not None:
                if len(v) != out[key].shape[1]:
                    raise DimensionMismatch(f"trial {t.trial_id}: {key} has dim {len(v)}")
                out[key][i] = v
    labels = np.array([t.label for t in trials], dtype=np.int64)
    return TrialArrays(avail=avail, labels=labels,
                       trial_ids=[t.trial_id for t in trials], **out)


def pack(batch):
    """Flatten a batch into one float matrix for estimator-style APIs.

    Columns: ``spk_td | u_td | spk_ti | u_ti | spk_td? u_td? spk_ti? u_ti?``
    with the four availability flags as 0/1.
    """
    return np.hstack([batch.spk_td, batch.u_td, batch.spk_ti, batch.u_ti,
                      batch.avail.astype(np.float64)])


def unpack(X, td_dim=None, labels=None):
    """Inverse of :func:`pack`. ``td_dim`` defaults to an even TD/TI split."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] < 8:
        raise DimensionMismatch(f"packed trials need at least 8 columns, got shape {X.shape}")
    width = X.shape[1] - 4
    if td_dim is None:
        if width % 4:
            raise DimensionMismatch("cannot split columns evenly; pass td_dim")
        td_dim = width // 4
    ti_dim = (width - 2 * td_dim) // 2
    if td_dim <= 0 or ti_dim <= 0 or 2 * td_dim + 2 * ti_dim != width:
        raise DimensionMismatch(f"{X.shape[1]} columns do not fit td_dim={td_dim}")
    flags = X[:, width:]
    if not np.all((flags == 0) | (flags == 1)):
        raise InvalidParameter("availability columns must be 0 or 1")
    c = np.cumsum([0, td_dim, td_dim, ti_dim, ti_dim])
    return TrialArrays(
        X[:, c[0]:c[1]], X[:, c[1]:c[2]], X[:, c[2]:c[3]], X[:, c[3]:c[4]],
        flags.astype(bool),
        None if labels is None else np.asarray(labels, dtype=np.int64),
    )


# ---------------------------------------------------------------------------
# convenience
# ---------------------------------------------------------------------------


def make_datasets(cfg, seed):
    """Train/valid trials from ``cfg.n_speakers`` speakers and a test set from
    ``cfg.n_test_speakers`` further speakers, sharing one pair of encoders.

    The test set repeats every test trial once per scenario in
    :data:`SCENARIO_TAGS` (trial ids suffixed ``/<scenario>``), so all
    scenarios are scored on the same underlying pairs.
    """
    cfg.validate()
    root = seeded_rng(seed)
    pop_seed, trial_seed, split_seed, test_seed = (int(x) for x in root.integers(2**63, size=4))
    pop = generate_population(cfg, seeded_rng(pop_seed))
    ids = [s.speaker_id for s in pop.speakers]
    train_pop = pop.subset(ids[:cfg.n_speakers])
    trials = build_trials(train_pop, cfg, seeded_rng(trial_seed), prefix="t")
    split = split_dataset(trials, cfg.train_ratio, seeded_rng(split_seed))

    test = []
    if cfg.n_test_speakers:
        test_pop = pop.subset(ids[cfg.n_speakers:])
        base = build_trials(test_pop, cfg, seeded_rng(test_seed), prefix="e")
        for tag in SCENARIO_TAGS:
            for t in base:
                masked = apply_scenario_mask(t, tag)
                test.append(dataclasses.replace(masked, trial_id=f"{t.trial_id}/{tag}"))
    logger.info("generated %d train, %d valid, %d test trials",
                len(split.train), len(split.valid), len(test))
    return split.train, split.valid, test
