"""Synthetic French corpus generator for tests and benchmarks.

Produces HC3-shaped records with one human and one machine answer each.
Machine answers are short didactic templates dense in register cues
(hedging phrases, impersonal openers, conditional verbs, tidy
punctuation). Human answers are colloquial and diffuse: small low-signal
openers, generic verbs, compositional tails, seeded typos, double spaces,
missing spaces after commas, unmatched parentheses. The registers are
linearly separable on n-gram and cue features, which is what detector
sanity checks need; the machine register keeps most of its evidence in
cue phrases, which character perturbations destroy.

Everything is driven by the shared counter-based PRNG: record i draws its
text from stream (seed, 0, i) and its translation-quality score from
stream (seed, 1, i), so quality is independent of content by construction.
"""

from __future__ import annotations

from typing import Sequence

from .corpus import Record
from .rng import SplitMix64, derive_seed

# (noun phrase, singular problem verb phrase)
_TOPICS = (
    ("le signal wifi", "se dégrade"),
    ("la batterie du téléphone", "se vide trop vite"),
    ("le four de la cuisine", "chauffe mal"),
    ("le moteur de la voiture", "fait un bruit étrange"),
    ("la connexion internet", "coupe sans raison"),
    ("le potager", "produit peu de légumes"),
    ("le chat de la maison", "refuse de manger"),
    ("le genou droit", "fait mal en courant"),
    ("l'ordinateur portable", "devient très lent"),
    ("le compte épargne", "rapporte si peu"),
    ("la guitare", "sonne faux"),
    ("le lave-linge", "fuit par moments"),
)

_QUESTION_FORMS = (
    "Pourquoi {noun} {problem} ?",
    "Comment réagir quand {noun} {problem} ?",
    "Est-ce normal que {noun} {problem} ?",
    "Que faire si {noun} {problem} ?",
)

# Machine sentences pack several cues each: impersonal openers, hedging
# phrases, and conditional verbs. The register's evidence lives mostly in
# these phrases rather than in any one content word, and the distinctive
# words stick to letters that have visual lookalikes, so character
# perturbations erase most of this register's n-grams.
_MACHINE_OPENERS = (
    "Il est possible que {noun} {problem} pour plusieurs raisons.",
    "Il se peut que {noun} {problem} sans cause unique.",
    "Il peut y avoir plusieurs explications lorsque {noun} {problem}.",
    "Il existe plusieurs pistes classiques lorsque {noun} {problem}.",
)

_MACHINE_BODIES = (
    "Cela pourrait induire une baisse visible des performances.",
    "Cela devrait se constater en quelques jours d'observation.",
    "Cela pourrait aussi nuire au confort d'utilisation au quotidien.",
    "Il est probable qu'un simple ajustement devrait suffire.",
    "Cela devrait rester stable si l'entretien suit une routine stricte.",
    "Une usure lente pourrait aussi expliquer ce constat.",
)

_MACHINE_HEDGES = (
    "Il convient de solliciter un second avis en cas de doute.",
    "Il est important de noter chaque observation utile.",
    "Voici quelques pistes utiles pour isoler la cause.",
    "Assurez-vous de tester chaque piste dans l'ordre.",
    "Il est essentiel de conserver une trace de chaque test.",
)

# Didactic answers like quantified advice. The digits and symbols in these
# sentences are outside both perturbation alphabets, so fragments of them
# survive attacks; each motif stays rare enough that a model trained on
# clean text spreads little weight onto it.
_MACHINE_QUANTS = (
    "Ce contrôle prend entre 5 et 10 minutes en pratique.",
    "Dans près de 80 % des cas, la cause reste bénigne.",
    "Un suivi sur 48 h permet d'y voir plus clair.",
    "Comptez environ 15 à 20 minutes pour un premier examen.",
    "Une amélioration se voit souvent sous 24 h.",
    "Près de 9 cas sur 10 se règlent sans intervention.",
    "Un écart de 10 % à 20 % reste dans la norme.",
    "Refaites le point au bout de 7 jours environ.",
)

_MACHINE_LIST_LEADS = (
    "Voici quelques pistes à suivre :",
    "Voici quelques tests utiles :",
)

_MACHINE_LIST_ITEMS = (
    "inspecter les parties accessibles",
    "suivre l'usure des parties visibles",
    "observer le souci pendant quelques jours",
    "noter l'heure exacte de chaque incident",
    "isoler la cause par des tests courts",
)

_MACHINE_CLOSERS = (
    "En conclusion, il conviendrait de rester prudent et constant.",
    "En conclusion, une approche prudente serait la piste la plus solide.",
    "Il est clair qu'une routine stable aiderait beaucoup.",
)

# Human registers: short low-signal openers, generic verbs, compositional
# tails. No single marker appears often enough to carry the class alone,
# so the human decision leans on shared statistics rather than a few
# heavyweight tokens.
_HUMAN_STARTS = ("bon", "alors", "ben", "bref", "sinon", "euh", "ah", "pff")

_HUMAN_PERSONAL = (
    "je pense que",
    "je crois que",
    "à mon avis",
    "selon moi",
    "je trouve que",
    "pour ma part",
)

_HUMAN_VERBS = (
    "marche mal",
    "marche plus",
    "fonctionne plus",
    "plante",
    "repart pas",
    "tient plus",
    "chauffe",
    "coupe",
    "rame",
    "bloque",
    "cale",
    "vieillit",
    "fatigue",
    "traine",
    "couine",
    "refuse de repartir",
    "fait des caprices",
    "fait du bruit",
)

_HUMAN_TIMES = (
    "depuis mardi",
    "depuis hier",
    "depuis un mois",
    "depuis cet hiver",
    "ce matin encore",
    "la nuit surtout",
    "le soir surtout",
    "quand il pleut",
    "une fois sur deux",
    "sans prévenir",
)

_HUMAN_MOODS = (
    "et ça m'agace",
    "et je sais pas pourquoi",
    "et personne voit le souci",
    "et tant pis",
    "mais bon on fait avec",
    "mais ça me dépasse",
    "enfin tu vois le genre",
    "et c'est pas la première fois",
    "alors on verra",
    "du coup je laisse",
)

_HUMAN_MIDDLE_FORMS = (
    "{noun} {verb} {time}",
    "mon vieux machin {verb} {time}",
    "le truc {verb} {time}",
    "tout {verb} {time}",
    "{noun} {verb} encore {time}",
    "ce bazar {verb} {time}",
)

_HUMAN_ENDS = (
    "on verra bien",
    "tant pis",
    "je touche plus à rien",
    "un voisin doit passer voir",
    "au bout d'un moment on lâche",
    "ça repartira un jour",
    "la garantie est morte",
    "je note tout sur un carnet",
    "ça date pas d'hier",
    "le vendeur a ri",
)

_HUMAN_COLON_LINES = ("résultat :", "au final :", "bilan :")

_TYPO_RATE = 0.18
# Share of human answers kept terse (near-featureless), and of machine
# answers carrying a quantified-advice sentence. Both shape how much of
# each register's evidence survives character perturbations.
_TERSE_RATE = 0.6
_QUANT_RATE = 0.85


def _choice(rng: SplitMix64, pool: Sequence[str]) -> str:
    return pool[rng.next_below(len(pool))]


def _machine_answer(rng: SplitMix64, noun: str, problem: str) -> str:
    parts = [
        _choice(rng, _MACHINE_OPENERS).format(noun=noun, problem=problem),
        _choice(rng, _MACHINE_BODIES),
    ]
    if rng.next_float() < _QUANT_RATE:
        parts.append(_choice(rng, _MACHINE_QUANTS))
    if rng.next_float() < 0.12:
        lead = _choice(rng, _MACHINE_LIST_LEADS)
        first = rng.next_below(len(_MACHINE_LIST_ITEMS) - 2)
        items = "\n".join(f"- {_MACHINE_LIST_ITEMS[first + k]}" for k in range(3))
        parts.append(f"{lead}\n{items}")
    parts.append(_choice(rng, _MACHINE_HEDGES))
    if rng.next_float() < 0.5:
        parts.append(_choice(rng, _MACHINE_HEDGES))
    parts.append(_choice(rng, _MACHINE_CLOSERS))
    return " ".join(parts)


def _typo(rng: SplitMix64, word: str) -> str:
    if len(word) < 4:
        return word
    pos = 1 + rng.next_below(len(word) - 2)
    op = rng.next_below(3)
    if op == 0:
        return word[:pos] + word[pos] + word[pos:]
    if op == 1:
        return word[:pos] + word[pos + 1 :]
    chars = list(word)
    chars[pos - 1], chars[pos] = chars[pos], chars[pos - 1]
    return "".join(chars)


def _roughen(rng: SplitMix64, chunk: str) -> str:
    words = chunk.split(" ")
    for i, word in enumerate(words):
        if rng.next_float() < _TYPO_RATE:
            words[i] = _typo(rng, word)
    return " ".join(words)


def _human_answer(rng: SplitMix64, noun: str) -> str:
    # A share of answers is terse: topic words plus a generic verb, little
    # else. These carry almost no class-specific n-grams, so the learned
    # model has to encode "no evidence means human" in its intercept.
    if rng.next_float() < _TERSE_RATE:
        text = f"{noun} {_choice(rng, _HUMAN_VERBS)} {_choice(rng, _HUMAN_TIMES)}"
        if rng.next_float() < 0.5:
            text += " " + _choice(rng, _HUMAN_MOODS)
        return _roughen(rng, text)
    chunks = []
    if rng.next_float() < 0.7:
        chunks.append(_choice(rng, _HUMAN_STARTS))
    if rng.next_float() < 0.35:
        chunks.append(_choice(rng, _HUMAN_PERSONAL))
    for _ in range(2 + rng.next_below(2)):
        form = _choice(rng, _HUMAN_MIDDLE_FORMS)
        chunks.append(
            form.format(
                noun=noun,
                verb=_choice(rng, _HUMAN_VERBS),
                time=_choice(rng, _HUMAN_TIMES),
            )
            + (" " + _choice(rng, _HUMAN_MOODS) if rng.next_float() < 0.5 else "")
        )
    if rng.next_float() < 0.7:
        chunks.append(_choice(rng, _HUMAN_ENDS))
    chunks = [_roughen(rng, c) for c in chunks]
    if rng.next_float() < 0.12:
        spot = rng.next_below(len(chunks))
        chunks[spot] = "(enfin " + chunks[spot]
    text = ""
    for i, chunk in enumerate(chunks):
        if i == 0:
            text = chunk
        elif rng.next_float() < 0.2:
            text += "," + chunk
        elif rng.next_float() < 0.15:
            text += "  " + chunk
        else:
            text += " " + chunk
    if rng.next_float() < 0.12:
        text += "\n" + _choice(rng, _HUMAN_COLON_LINES)
    tail_roll = rng.next_float()
    if tail_roll < 0.3:
        text += "..."
    elif tail_roll < 0.5:
        text += " !!"
    elif tail_roll < 0.6:
        text += " ??"
    return text


def generate_corpus(
    n_records: int,
    seed: int,
    quality_mode: str = "independent",
    source_tags: Sequence[str] = ("synth",),
    language: str = "fr",
) -> list[Record]:
    """Deterministic synthetic corpus of n_records question/answer records.

    quality_mode "independent" draws translation_quality 1..5 from a stream
    disjoint from the text stream; "none" leaves it unset.
    """
    if quality_mode not in ("independent", "none"):
        raise ValueError(f"unknown quality_mode {quality_mode!r}")
    if not source_tags:
        raise ValueError("source_tags must not be empty")
    records = []
    for i in range(n_records):
        rng = SplitMix64(derive_seed(seed, 0, i))
        noun, problem = _TOPICS[rng.next_below(len(_TOPICS))]
        question = _choice(rng, _QUESTION_FORMS).format(noun=noun, problem=problem)
        machine = _machine_answer(rng, noun, problem)
        human = _human_answer(rng, noun)
        quality = None
        if quality_mode == "independent":
            quality = 1 + SplitMix64(derive_seed(seed, 1, i)).next_below(5)
        records.append(
            Record(
                id=f"synth-{i:05d}",
                question=question,
                human_answers=(human,),
                machine_answers=(machine,),
                language=language,
                source_tag=source_tags[i % len(source_tags)],
                translation_quality=quality,
            )
        )
    return records
