"""Synthetic corpus: terse farm-logbook entries over a confusable lexicon.

The generator samples weighted sentence templates (some with slot
variables) to build an arbitrarily long word stream.  The register is
deliberately telegraphic -- log entries rather than flowing prose -- so
that short content words dominate the token stream instead of
determiners.

The lexicon is built around dense neighbourhoods of real three-letter
words (bet/get/jet/let/met/net/pet/set/vet/wet/yet, bat/cat/fat/hat/
mat/oat/pat/rat/sat/vat, ...).  Many of these words sit one or two bit
flips away from each other in ASCII, which concentrates decoding
pressure exactly where physical evidence is weakest: a single corrupted
bit often leaves several vocabulary words nearly equidistant from the
received bytes, and a double flip can make a neighbouring word strictly
closer than the transmitted one.  Each such word is given its own
distinctive sentence contexts so that contextual evidence can separate
what the channel cannot.

Slot templates pull in the opposite direction: their fillers are
interchangeable in context (the model sees them in identical frames)
but sit far apart in bit space, so channel evidence resolves them
easily while context alone cannot.  Together the two template kinds
exercise both failure modes of single-evidence decoding.

The written vocabulary is larger than the template lexicon: it also
carries distractor entries -- pseudo-words sitting exactly two bit
flips from a lexicon word and never closer than two flips to any of
them.  They never occur in text, so they cost the contextual model
nothing, but they crowd the bit-space neighbourhood of every real word
the way a full natural-language dictionary would: after a single bit
flip the received bytes are often no closer to the transmitted word
than to a distractor, and physical evidence alone misranks the pair
whenever the flipped bit drew a larger magnitude than a healthy one.
Keeping distractors at distance two (never one) means they absorb
ranking pressure without ever being what a single flip turns a word
into, which would be an undetectable error instead of a hard case.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "SENTENCES",
    "SLOTS",
    "lexicon",
    "word_frequencies",
    "distractor_words",
    "validate_templates",
    "generate_words",
    "write_corpus_files",
]

# Slot fillers are same-length and mutually distant in bit space
# (pairwise XOR weight >= 3), so they are easy for channel evidence and
# hard for context.
SLOTS: dict[str, tuple[str, ...]] = {
    "beast": ("hen", "fox", "ram", "pup", "kit"),
    "spot": ("barn", "mill", "pond", "gate", "loft", "byre", "moor", "glen"),
    "food": ("milk", "veal", "rice", "stew", "corn", "oats"),
    "mood": ("dim", "odd", "dry", "shy"),
    "kin": ("son", "boy", "sir", "mum"),
    "ware": ("mug", "jar", "urn"),
    "went4": ("swam", "rode", "came", "went"),
    "count": ("two", "six", "ten"),
}

# (weight, template).  Slot names in braces.  Sampling is by weight;
# each slot instance is filled uniformly.
#
# The fixed entries are deliberately packed with short words from the
# dense bit-neighbourhoods, but every such word keeps distinctive
# immediate neighbours: validate_templates() proves that no two words
# one bit flip apart ever share both their left and right trigram
# contexts, so context can always separate what the channel confuses.
SENTENCES: tuple[tuple[int, str], ...] = (
    # -at column: bat cat fat mat oat pat rat sat vat eat
    (18, "the gray cat sat on the straw mat"),
    (18, "a barn rat bit the old vat rim"),
    (14, "the fat hen sat in the nest box"),
    (4, "a bat hung in the dark loft"),
    (10, "the black bat flew past the byre"),
    (14, "the old cart sat out in the rain"),
    (3, "the colt got a pat at the rail"),
    (7, "they sat down to eat at noon"),
    (2, "oat straw went down for bedding"),
    # -et column: bet jet let met net pet set vet wet
    (4, "he set the milk pail down"),
    (14, "wet moss lay thick on the low wall"),
    (3, "the vet came up from town at dusk"),
    (4, "they let the colt out at noon"),
    (10, "a stout net hung on the mast peg"),
    (3, "the men met at the forge door"),
    (3, "a new jet pump fed the trough"),
    (4, "he bet a crown on the bay colt"),
    (2, "her pet wren sang at dawn"),
    (2, "jet black was the new foal"),
    # -it column: bit sit pit hit fit lit wit
    (4, "the colt took the bit hard"),
    (3, "the saw bit deep into the oak"),
    (3, "come sit by the hearth"),
    (3, "the marl pit filled with rain"),
    (3, "hail hit the slate roof hard"),
    (3, "the new coat was a good fit"),
    (3, "the forge fire lit the lane"),
    (2, "quick of wit was the smith"),
    # -ot column: dot got hot lot not rot pot
    (4, "not a drop fell that week"),
    (10, "the hay lot lay under flood"),
    (3, "a dot of red tar marked the tup"),
    (3, "the stew pot hung black over the coals"),
    (4, "rot got into the damp hay rick"),
    (3, "a hot spell dried the beck"),
    (3, "the boy got a start at the forge"),
    (2, "the sheep got out past a gap in the hedge"),
    # -ed column: bed fed led red wed
    (4, "the boy fed bran mash to the colt"),
    (3, "she led the gray mare up the lane"),
    (3, "a red sun rose over the fell"),
    (3, "his bed stood under the low beam"),
    (2, "they were wed at the kirk in may"),
    # -ap column: cap gap map sap rap
    (10, "his cap lay on the chest lid"),
    (3, "sweet sap ran from the birch bore"),
    (3, "a sharp rap came at the shutter"),
    (3, "he drew a map of the north field"),
    # -ad column: bad had lad sad
    (3, "a bad squall wrecked the pier"),
    (3, "they had rain for a week"),
    (3, "the lad swept the granary floor"),
    (3, "his hat blew off in the gale"),
    (2, "a sad end for the old ram"),
    # -ay column: hay lay may
    (4, "they got the hay in before the rain"),
    (3, "the geese lay still on the pond ice"),
    (2, "the may fair ran three days"),
    # -ew column: dew few hew mew new pew yew
    (3, "dew lay thick at first light"),
    (3, "a few geese went south today"),
    (3, "the new plough cut true"),
    (2, "the men hew larch for the byre roof"),
    (2, "a thin mew came from the loft"),
    (2, "a yew stood by the kirk gate"),
    (2, "a carved pew stood by the font"),
    # -og / -ob / -od columns: dog fog hog log mob job sod pod nod god
    (3, "the mill dog ran the fence line"),
    (3, "a birch log lay by the saw pit"),
    (3, "thick fog shut the glen till noon"),
    (3, "the hog broke into the swede patch"),
    (2, "the mob at the fair sang till dark"),
    (2, "his job was to mend the mill race"),
    (2, "he cut sod for the new roof"),
    (2, "she split a pea pod at noon"),
    (2, "a nod from the reeve and they rode on"),
    (2, "god sent rain at last"),
    # -in / -en columns: bin din gin pin tin inn ten men den
    (3, "the corn bin stood full"),
    (2, "a din rose from the wool shed"),
    (2, "the gin trap lay empty"),
    (3, "a pin held the shawl at her neck"),
    (2, "a tin can stood on the sill"),
    (2, "the inn yard was full by dark"),
    (3, "ten ewes went to the tup"),
    (3, "the men cut bracken on the fell"),
    (2, "the fox den lay under the oak"),
    # -an / -un columns: fan man van ran sun run
    (3, "the sun went down red as coal"),
    (3, "they run the ewes off the fell in march"),
    (3, "a van took the wool bales south"),
    (3, "the man from the bank came at noon"),
    (2, "fan the forge coals till they glow"),
    # -ow / -aw columns: low mow sow bow saw paw
    (2, "we sow the corn in april"),
    (2, "they mow the north field in june"),
    (2, "a low mist lay on the pond"),
    (2, "the bow rose high in the gale"),
    (2, "a paw print marked the snow"),
    # -ut / -ub / -ug / -um columns: nut cut hut tub jug pug rug dug gum rum rut
    (3, "a nut loaf stood on the shelf"),
    (3, "cut peat dried on the bank"),
    (2, "the hut door hung loose"),
    (2, "the wash tub froze over night"),
    (3, "a jug of cream went to the show"),
    (3, "the pug dug at the mole run"),
    (2, "a rag rug hung at the door"),
    (2, "gum from the pine stuck fast"),
    (2, "the last rum went round the crew"),
    (3, "the cart stuck in a deep rut"),
    # recurring stock entries -- the register repeats its formulas, and
    # these pack the dense neighbourhoods hardest
    (42, "the cat sat on the mat"),
    (42, "a fat rat sat in the vat"),
    (28, "wet hay lay in the big vat"),
    (28, "the bad cat bit the old dog"),
    (21, "six men sat at the fire"),
    (21, "the pet cat bit the vet"),
    (21, "a cap and a map lay on the mat"),
    (18, "a rat ran at the tub"),
    (5, "the dog dug at the log"),
    (18, "the lad had a bet on the colt"),
    (4, "the red hen fed by the bin"),
    (4, "the pug dug a pit in the sod"),
    # longer flowing entries for texture
    (1, "the mist came down from the crag and held the vale till noon"),
    (1, "he took the cart up the road to the mill with corn from the farm"),
    (1, "she woke at dawn and went down to the brook for water"),
    (1, "the wind tore at the straw roof all night and no one slept"),
    (1, "a hawk hung still over the heath then dove like a stone"),
    (1, "one oar was split at the blade so they rowed home slow"),
    # slot frames: flat context, distant fillers
    (6, "the {beast} slept in the {spot}"),
    (6, "a {mood} {beast} ran past the {spot}"),
    (6, "they had {food} for supper that night"),
    (6, "she took the {food} down to the {spot}"),
    (6, "the {kin} left a {ware} on the table"),
    (6, "a {ware} with {food} stood on the shelf"),
    (4, "he walked from the {spot} to the {spot}"),
    (4, "the {beast} crept by the {spot} door"),
    (4, "the {kin} {went4} home at dusk"),
    (4, "{count} men came to mend the fence"),
)

_SEED_DOMAIN = 0x25EC  # keeps corpus draws separate from channel draws


def lexicon() -> tuple[str, ...]:
    """All distinct words the templates can emit, sorted."""
    words: set[str] = set()
    for _, tpl in SENTENCES:
        for tok in tpl.split():
            if tok.startswith("{"):
                words.update(SLOTS[tok[1:-1]])
            else:
                words.add(tok)
    return tuple(sorted(words))


def _bit_distance(a: str, b: str) -> int:
    return sum(bin(x ^ y).count("1") for x, y in zip(a.encode(), b.encode()))


_POPCOUNT = np.array([bin(i).count("1") for i in range(256)], dtype=np.int64)
_DISTRACTOR_DOMAIN = 0xD157


def word_frequencies() -> dict[str, float]:
    """Expected token frequency of each lexicon word under the template
    weights (slot positions spread their weight over the fillers)."""
    mass: dict[str, float] = {}
    total = 0.0
    for weight, tpl in SENTENCES:
        toks = tpl.split()
        total += weight * len(toks)
        for tok in toks:
            for w in _expand(tok):
                mass[w] = mass.get(w, 0.0) + weight / len(_expand(tok))
    return {w: m / total for w, m in mass.items()}


def distractor_words(
    words: tuple[str, ...] | None = None,
    per_word: int = 45,
    seed: int = 0,
    protect_threshold: float = 0.004,
) -> tuple[str, ...]:
    """Pseudo-words two bit flips from the lexicon.

    For each lexicon word, every two-bit perturbation that stays inside
    ``a-z`` is enumerated.  Candidates within one flip of a *common*
    lexicon word (expected token frequency >= ``protect_threshold``)
    are discarded: distance one turns a single-flip corruption of that
    word into a silent vocabulary hit, and for common words that cost
    dominates.  Tail words tolerate distance-one distractors -- their
    corruptions are rare enough that the extra ranking pressure is
    worth far more than the sliver of silent errors, and it mirrors how
    a natural dictionary crowds every word regardless of frequency.
    Up to ``per_word`` survivors are kept per source word.
    Deterministic for a given seed.
    """
    if words is None:
        words = lexicon()
    freq = word_frequencies()
    by_len: dict[int, np.ndarray] = {}
    guard_by_len: dict[int, np.ndarray] = {}
    for length in {len(w) for w in words}:
        group = [w for w in words if len(w) == length]
        packed = np.frombuffer(
            "".join(group).encode("ascii"), dtype=np.uint8
        ).reshape(len(group), length)
        by_len[length] = packed
        common = np.array(
            [freq.get(w, 0.0) >= protect_threshold for w in group], dtype=bool
        )
        guard_by_len[length] = common
    word_set = set(words)
    rng = np.random.default_rng(np.random.SeedSequence([seed, _DISTRACTOR_DOMAIN]))
    keep: set[str] = set()
    for w in sorted(word_set):
        base = np.frombuffer(w.encode("ascii"), dtype=np.uint8)
        n_bits = 8 * len(base)
        found: list[str] = []
        for p in range(n_bits):
            for q in range(p + 1, n_bits):
                cand = base.copy()
                cand[p // 8] ^= 1 << (7 - p % 8)
                cand[q // 8] ^= 1 << (7 - q % 8)
                if not ((cand >= 0x61) & (cand <= 0x7A)).all():
                    continue
                text = cand.tobytes().decode("ascii")
                if text in word_set:
                    continue
                dist = _POPCOUNT[by_len[len(w)] ^ cand].sum(axis=1)
                if (dist[guard_by_len[len(w)]] < 2).any():
                    continue
                found.append(text)
        if len(found) > per_word:
            picked = rng.choice(len(found), size=per_word, replace=False)
            found = [found[i] for i in sorted(picked)]
        keep.update(found)
    return tuple(sorted(keep))


def _expand(tok: str) -> tuple[str, ...]:
    if tok.startswith("{"):
        return SLOTS[tok[1:-1]]
    return (tok,)


def _context_occurrences() -> dict[str, list[tuple]]:
    """Per word: realized (left-bigram, right-bigram) trigram contexts.

    A side is None when it would cross a sentence boundary (those
    contexts are diluted across many random sentence joins and carry no
    reliable evidence either way).  Slot positions expand to every
    filler combination inside the five-word window.
    """
    from itertools import product

    occ: dict[str, list[tuple]] = {}
    for _, tpl in SENTENCES:
        toks = tpl.split()
        n = len(toks)
        for i in range(n):
            window = [
                _expand(toks[j]) if 0 <= j < n else (None,)
                for j in range(i - 2, i + 3)
            ]
            for a, b, w, c, d in product(*window):
                fw = (a, b) if i >= 2 else None
                bw = (c, d) if i + 2 <= n - 1 else None
                occ.setdefault(w, []).append((fw, bw))
    return occ


def validate_templates() -> None:
    """Sanity checks on the template tables.

    Raises ValueError on malformed tokens, unknown slot names, slot
    filler sets that are not same-length and mutually distant, or --
    the property the whole corpus design rests on -- a pair of words
    one bit flip apart whose sentence contexts overlap on both sides
    at once, which would leave context unable to separate them.
    """
    for name, fillers in SLOTS.items():
        length = len(fillers[0])
        for f in fillers:
            if len(f) != length:
                raise ValueError(f"slot {name!r}: fillers differ in length")
        for i, x in enumerate(fillers):
            for y in fillers[i + 1 :]:
                if _bit_distance(x, y) < 3:
                    raise ValueError(
                        f"slot {name!r}: {x!r}/{y!r} too close in bit space"
                    )
    for weight, tpl in SENTENCES:
        if weight <= 0:
            raise ValueError(f"non-positive weight on {tpl!r}")
        for tok in tpl.split():
            if tok.startswith("{"):
                if tok[1:-1] not in SLOTS:
                    raise ValueError(f"unknown slot {tok!r}")
            elif not (tok.isascii() and tok.isalpha() and tok == tok.lower()):
                raise ValueError(f"bad template token {tok!r}")

    occ = _context_occurrences()
    fwd = {w: {f for f, _ in pairs if f} for w, pairs in occ.items()}
    bwd = {w: {b for _, b in pairs if b} for w, pairs in occ.items()}
    words = sorted(occ)
    for w in words:
        for v in words:
            if v <= w or len(v) != len(w) or _bit_distance(w, v) != 1:
                continue
            for a, b in ((w, v), (v, w)):
                for fw, bw in occ[a]:
                    fwd_ok = fw is not None and fw not in fwd[b]
                    bwd_ok = bw is not None and bw not in bwd[b]
                    if not (fwd_ok or bwd_ok):
                        raise ValueError(
                            f"{a!r} and one-bit neighbour {b!r} share context "
                            f"{fw}/{bw}; context cannot separate them"
                        )


def generate_words(n_words: int, seed: int = 0) -> list[str]:
    """Sample a stream of at least ``n_words`` words (whole sentences)."""
    validate_templates()
    rng = np.random.default_rng(np.random.SeedSequence([seed, _SEED_DOMAIN]))
    weights = np.array([w for w, _ in SENTENCES], dtype=float)
    weights /= weights.sum()
    out: list[str] = []
    while len(out) < n_words:
        _, tpl = SENTENCES[rng.choice(len(SENTENCES), p=weights)]
        for tok in tpl.split():
            if tok.startswith("{"):
                fillers = SLOTS[tok[1:-1]]
                out.append(fillers[rng.integers(len(fillers))])
            else:
                out.append(tok)
    return out


def write_corpus_files(
    corpus_path: str,
    vocab_path: str,
    n_words: int = 60000,
    seed: int = 0,
    distractors_per_word: int = 45,
) -> tuple[int, int]:
    """Write the corpus (single line, space-separated) and vocabulary.

    The vocabulary lists every word the templates can produce plus the
    two-flip distractor entries, one per line, sorted -- a dictionary
    rather than a transcript of any finite sample.  Returns
    (words written, vocabulary size).
    """
    words = generate_words(n_words, seed=seed)
    with open(corpus_path, "w", encoding="utf-8") as fh:
        fh.write(" ".join(words))
        fh.write("\n")
    vocab = sorted(
        set(lexicon())
        | set(distractor_words(per_word=distractors_per_word, seed=seed))
    )
    with open(vocab_path, "w", encoding="utf-8") as fh:
        for w in vocab:
            fh.write(w + "\n")
    return len(words), len(vocab)
