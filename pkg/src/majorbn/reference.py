"""The shipped reference network for academic-major prediction.

Structure: a naive-Bayes star with ``major`` as the only root and one arc from
it to each of the 18 questionnaire factors (19 nodes, 18 arcs).  Every factor
takes the four-level quad scale.

The probabilities are SYNTHETIC.  No survey data was published, so the CPTs
below are a hand-written parameterization chosen so that the exact engine
classifies synthetic students with roughly 70% accuracy:

* most factors concentrate 99.5% of their mass on one level that depends only
  on the broad track (theoretical sciences, humanities, vocational), which
  makes full-questionnaire evidence likely enough for rejection sampling;
* ``tendency`` and ``job`` are diffuse and carry the weak signal that
  separates majors inside a track, which is where the classifier errs.

Tuned once with the exact engine, then frozen; ``data/reference.bn`` is the
canonical serialization of :func:`reference_network`.
"""

from __future__ import annotations

from importlib import resources

from .network import QUAD_STATES, Network, build_network

TARGET = "major"

MAJORS = (
    "math_physics",
    "experimental_sciences",
    "human_sciences",
    "technical_vocational",
    "work_knowledge",
)

MAJOR_PRIOR = (0.24, 0.28, 0.2, 0.16, 0.12)

FACTORS = (
    "high_school_score",
    "middle_school_score",
    "not_come_score",
    "university",
    "parent_major",
    "parent_guide",
    "teachers_guide",
    "manager_guide",
    "adviser_guide",
    "friend_advise",
    "weekly_plan",
    "kinfolk_major",
    "job",
    "society_requirement",
    "society_lookout",
    "social_position",
    "salary",
    "tendency",
)

DESCRIPTIONS = {
    "major": "academic major chosen in secondary school",
    "high_school_score": "junior high school grades",
    "middle_school_score": "school grades",
    "not_come_score": "threshold score",
    "university": "way into university",
    "parent_major": "parents' field of study",
    "parent_guide": "parents' guidance",
    "teachers_guide": "teachers' guidance",
    "manager_guide": "principal's guidance",
    "adviser_guide": "consultant's guidance",
    "friend_advise": "friends' recommendation",
    "weekly_plan": "job introduction programme",
    "kinfolk_major": "relatives' field of study",
    "job": "jobs of the future",
    "society_requirement": "awareness of community needs",
    "society_lookout": "society's view of the field",
    "social_position": "social status of the job",
    "salary": "salary and wage of the job",
    "tendency": "interest",
}

PEAK_MASS = 0.995

# Remaining mass by distance from the peak level.
_EDGE_TAIL = (0.003, 0.0015, 0.0005)
_INNER_TAIL = (0.002, 0.001)

# Level (index into QUAD_STATES) carrying PEAK_MASS, per track:
# (theoretical sciences, humanities, vocational).
_TRACK_PEAKS = {
    "high_school_score": (3, 2, 1),
    "middle_school_score": (3, 2, 1),
    "not_come_score": (3, 2, 1),
    "university": (3, 2, 0),
    "parent_major": (2, 1, 1),
    "parent_guide": (2, 2, 2),
    "teachers_guide": (2, 1, 2),
    "manager_guide": (1, 1, 2),
    "adviser_guide": (2, 2, 3),
    "friend_advise": (1, 2, 2),
    "weekly_plan": (1, 1, 2),
    "kinfolk_major": (2, 1, 1),
    "society_requirement": (2, 1, 2),
    "society_lookout": (3, 1, 1),
    "social_position": (3, 2, 1),
    "salary": (2, 1, 3),
}
_TRACK_OF = (0, 0, 1, 2, 2)

# Diffuse factors, one row per major in MAJORS order.
_DIFFUSE = {
    "job": (
        (0.1, 0.2, 0.3, 0.4),
        (0.05, 0.15, 0.3, 0.5),
        (0.25, 0.25, 0.25, 0.25),
        (0.3, 0.3, 0.25, 0.15),
        (0.1, 0.2, 0.3, 0.4),
    ),
    "tendency": (
        (0.05, 0.15, 0.3, 0.5),
        (0.1, 0.3, 0.4, 0.2),
        (0.25, 0.25, 0.25, 0.25),
        (0.1, 0.2, 0.3, 0.4),
        (0.3, 0.3, 0.25, 0.15),
    ),
}


def _peaked_row(peak: int) -> list[float]:
    """PEAK_MASS on level ``peak``, the rest falling off with distance."""
    tail = _EDGE_TAIL if peak in (0, 3) else _INNER_TAIL
    return [PEAK_MASS if i == peak else tail[abs(i - peak) - 1] for i in range(4)]


def reference_network() -> Network:
    """Build the reference network from the parameters above."""
    variables = [(TARGET, MAJORS)] + [(f, QUAD_STATES) for f in FACTORS]
    cpts: dict[str, object] = {TARGET: list(MAJOR_PRIOR)}
    for f in FACTORS:
        if f in _DIFFUSE:
            cpts[f] = [list(r) for r in _DIFFUSE[f]]
        else:
            cpts[f] = [_peaked_row(_TRACK_PEAKS[f][track]) for track in _TRACK_OF]
    return build_network(variables, [(TARGET, f) for f in FACTORS], cpts, name="academic_major")


def reference_text() -> str:
    """The shipped native file's contents."""
    return resources.files("majorbn").joinpath("data/reference.bn").read_text(encoding="utf-8")


def load_reference() -> Network:
    from .netfile import parse_network

    return parse_network(reference_text())
