"""Rule-augmented valence scoring in the style of VADER.

Only the rules below are applied; idioms, "but" shifts and the other VADER
heuristics are out of scope.

* negation among the three preceding tokens multiplies the valence by -0.74
* each booster (dampener) among the three preceding tokens pushes the valence
  0.293 away from (towards) zero
* an all-caps valence token is scaled by 1.5
* each trailing ``!`` (at most 3) adds 0.292 in the direction of the sum
"""

from __future__ import annotations

import math

from .textstats import Lexicon, TokenStream, is_all_caps, tokenize

NEGATION_SCALAR = -0.74
BOOSTER_INCR = 0.293
CAPS_SCALAR = 1.5
EXCLAIM_INCR = 0.292
MAX_EXCLAIM = 3
ALPHA = 15.0
WINDOW = 3

NEGATIONS = frozenset(
    """not no never none nobody nothing neither nor nowhere cannot without
    aint arent cant couldnt didnt doesnt dont hadnt hasnt havent isnt mightnt
    mustnt neednt shant shouldnt wasnt werent wont wouldnt rarely seldom despite""".split()
)

BOOSTERS = {
    **dict.fromkeys(
        """absolutely amazingly awfully completely considerably deeply definitely
        enormously entirely especially exceptionally extremely fabulously fully
        greatly highly hugely incredibly intensely majorly more most particularly
        purely quite really remarkably so substantially thoroughly totally
        tremendously uber unbelievably unusually utterly very super""".split(),
        BOOSTER_INCR,
    ),
    **dict.fromkeys(
        """almost barely hardly kinda kindof less little marginally occasionally
        partly scarcely slightly somewhat sorta sortof""".split(),
        -BOOSTER_INCR,
    ),
}


def _is_negation(token: str) -> bool:
    return token in NEGATIONS or token.endswith("n't")


def _trailing_exclaims(text: str) -> int:
    stripped = text.rstrip()
    n = len(stripped) - len(stripped.rstrip("!"))
    return min(n, MAX_EXCLAIM)


def token_valences(stream: TokenStream, lexicon: Lexicon) -> list[float]:
    """Rule-adjusted valence of each token; 0.0 for tokens without valence."""
    tokens = stream.tokens
    out = []
    for i, tok in enumerate(tokens):
        v = lexicon.valence.get(tok, 0.0)
        if v == 0.0:
            out.append(0.0)
            continue
        sign = 1.0 if v > 0 else -1.0
        if is_all_caps(stream.raw[i]):
            v *= CAPS_SCALAR
        window = tokens[max(0, i - WINDOW):i]
        for prev in window:
            v += sign * BOOSTERS.get(prev, 0.0)
        if any(_is_negation(prev) for prev in window):
            v *= NEGATION_SCALAR
        out.append(v)
    return out


def normalize_compound(total: float, alpha: float = ALPHA) -> float:
    return total / math.sqrt(total * total + alpha)


def sentiment_scores(text: str, lexicon: Lexicon, stream: TokenStream | None = None):
    """Return ``(vad_neg, vad_pos, vad_neu, vad_comp)``.

    The three shares split the token mass: each positive or negative token
    contributes its absolute adjusted valence, each other token contributes 1.
    """
    if stream is None:
        stream = tokenize(text)
    vals = token_valences(stream, lexicon)
    total = sum(vals)
    if total != 0.0:
        total += math.copysign(EXCLAIM_INCR * _trailing_exclaims(text), total)
    pos = sum(v for v in vals if v > 0)
    neg = -sum(v for v in vals if v < 0)
    neu = float(sum(1 for v in vals if v == 0.0))
    mass = pos + neg + neu
    if mass == 0.0:
        return 0.0, 0.0, 1.0, 0.0
    return neg / mass, pos / mass, neu / mass, normalize_compound(total)
