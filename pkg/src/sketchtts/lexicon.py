"""Built-in pronunciation lexicon plus letter-to-sound fallback.

The lexicon covers the bundled corpus sentences, the demo texts and a set of
common words. Out-of-vocabulary words fall back to deterministic spelling
rules; the result is crude but stable, which is what the rest of the pipeline
needs.
"""

from __future__ import annotations

_RAW_LEXICON = """
a AH0
about AH0 B AW1 T
after AE1 F T ER0
again AH0 G EH1 N
air EH1 R
all AO1 L
always AO1 L W EY2 Z
am AE1 M
an AE1 N
and AH0 N D
any EH1 N IY0
are AA1 R
as AE1 Z
at AE1 T
back B AE1 K
be B IY1
been B IH1 N
before B IH0 F AO1 R
begin B IH0 G IH1 N
being B IY1 IH0 NG
big B IH1 G
blue B L UW1
book B UH1 K
brown B R AW1 N
but B AH1 T
by B AY1
came K EY1 M
can K AE1 N
cat K AE1 T
child CH AY1 L D
close K L OW1 Z
come K AH1 M
control K AH0 N T R OW1 L
could K UH1 D
curve K ER1 V
dark D AA1 R K
day D EY1
did D IH1 D
didn't D IH1 D AH0 N T
do D UW1
does D AH1 Z
dog D AO1 G
down D AW1 N
draw D R AO1
drawing D R AO1 IH0 NG
earth ER1 TH
eight EY1 T
emphasis EH1 M F AH0 S IH0 S
end EH1 N D
energy EH1 N ER0 JH IY0
fall F AO1 L
fast F AE1 S T
fire F AY1 ER0
first F ER1 S T
five F AY1 V
for F AO1 R
four F AO1 R
fox F AA1 K S
from F R AH1 M
get G EH1 T
give G IH1 V
go G OW1
going G OW1 IH0 NG
good G UH1 D
got G AA1 T
green G R IY1 N
had HH AE1 D
happy HH AE1 P IY0
harm HH AA1 R M
has HH AE1 Z
have HH AE1 V
he HH IY1
hear HH IY1 R
hello HH AH0 L OW1
her HH ER1
here HH IY1 R
high HH AY1
his HH IH1 Z
home HH OW1 M
house HH AW1 S
how HH AW1
hundred HH AH1 N D R AH0 D
i AY1
if IH1 F
in IH0 N
into IH0 N T UW1
is IH1 Z
it IH1 T
its IH1 T S
jumps JH AH1 M P S
just JH AH1 S T
know N OW1
last L AE1 S T
lay L EY1
lazy L EY1 Z IY0
left L EH1 F T
light L AY1 T
like L AY1 K
line L AY1 N
lion L AY1 AH0 N
listen L IH1 S AH0 N
little L IH1 T AH0 L
lone L OW1 N
long L AO1 NG
look L UH1 K
loud L AW1 D
love L AH1 V
low L OW1
made M EY1 D
make M EY1 K
man M AE1 N
many M EH1 N IY0
may M EY1
mean M IY1 N
men M EH1 N
money M AH1 N IY0
moon M UW1 N
more M AO1 R
morning M AO1 R N IH0 NG
most M OW1 S T
mother M AH1 DH ER0
music M Y UW1 Z IH0 K
my M AY1
need N IY1 D
never N EH1 V ER0
new N UW1
next N EH1 K S T
night N AY1 T
nine N AY1 N
no N OW1
not N AA1 T
now N AW1
of AH1 V
on AA1 N
one W AH1 N
only OW1 N L IY0
open OW1 P AH0 N
or AO1 R
other AH1 DH ER0
our AW1 ER0
out AW1 T
over OW1 V ER0
people P IY1 P AH0 L
pitch P IH1 CH
play P L EY1
please P L IY1 Z
quick K W IH1 K
quiet K W AY1 AH0 T
ran R AE1 N
read R IY1 D
red R EH1 D
right R AY1 T
rise R AY1 Z
run R AH1 N
sad S AE1 D
said S EH1 D
saw S AO1
say S EY1
says S EH1 Z
see S IY1
seven S EH1 V AH0 N
she SH IY1
short SH AO1 R T
should SH UH1 D
sing S IH1 NG
six S IH1 K S
sketch S K EH1 CH
slow S L OW1
small S M AO1 L
so S OW1
some S AH1 M
song S AO1 NG
sound S AW1 N D
sounds S AW1 N D Z
speech S P IY1 CH
star S T AA1 R
start S T AA1 R T
stole S T OW1 L
stop S T AA1 P
story S T AO1 R IY0
sun S AH1 N
take T EY1 K
talk T AO1 K
tell T EH1 L
ten T EH1 N
test T EH1 S T
thank TH AE1 NG K
thanks TH AE1 NG K S
that DH AE1 T
the DH AH0
them DH EH1 M
there DH EH1 R
these DH IY1 Z
they DH EY1
think TH IH1 NG K
this DH IH1 S
those DH OW1 Z
thought TH AO1 T
three TH R IY1
time T AY1 M
to T UW1
told T OW1 L D
tone T OW1 N
took T UH1 K
trend T R EH1 N D
two T UW1
under AH1 N D ER0
up AH1 P
us AH1 S
very V EH1 R IY0
voice V OY1 S
walk W AO1 K
want W AA1 N T
was W AA1 Z
water W AO1 T ER0
way W EY1
we W IY1
what W AH1 T
when W EH1 N
where W EH1 R
who HH UW1
why W AY1
will W IH1 L
with W IH1 DH
woman W UH1 M AH0 N
word W ER1 D
world W ER1 L D
would W UH1 D
write R AY1 T
yellow Y EH1 L OW0
yes Y EH1 S
you Y UW1
your Y AO1 R
zero Z IY1 R OW0
"""

LEXICON: dict[str, list[str]] = {}
for _line in _RAW_LEXICON.strip().splitlines():
    _parts = _line.split()
    LEXICON[_parts[0]] = _parts[1:]


# Digraphs checked before single letters; longest match first.
_DIGRAPH_RULES: list[tuple[str, list[str]]] = [
    ("tch", ["CH"]),
    ("igh", ["AY"]),
    ("ch", ["CH"]),
    ("sh", ["SH"]),
    ("th", ["TH"]),
    ("ph", ["F"]),
    ("wh", ["W"]),
    ("ck", ["K"]),
    ("ng", ["NG"]),
    ("qu", ["K", "W"]),
    ("ee", ["IY"]),
    ("ea", ["IY"]),
    ("oo", ["UW"]),
    ("ou", ["AW"]),
    ("ow", ["OW"]),
    ("ai", ["EY"]),
    ("ay", ["EY"]),
    ("oa", ["OW"]),
    ("oy", ["OY"]),
    ("oi", ["OY"]),
    ("au", ["AO"]),
    ("aw", ["AO"]),
    ("ar", ["AA", "R"]),
    ("er", ["ER"]),
    ("ir", ["ER"]),
    ("or", ["AO", "R"]),
    ("ur", ["ER"]),
]

_LETTER_RULES: dict[str, list[str]] = {
    "a": ["AE"], "b": ["B"], "c": ["K"], "d": ["D"], "e": ["EH"],
    "f": ["F"], "g": ["G"], "h": ["HH"], "i": ["IH"], "j": ["JH"],
    "k": ["K"], "l": ["L"], "m": ["M"], "n": ["N"], "o": ["AA"],
    "p": ["P"], "q": ["K"], "r": ["R"], "s": ["S"], "t": ["T"],
    "u": ["AH"], "v": ["V"], "w": ["W"], "x": ["K", "S"],
    "y": ["IY"], "z": ["Z"],
}

_VOWEL_BASES = {"AA", "AE", "AH", "AO", "AW", "AY", "EH", "ER",
                "EY", "IH", "IY", "OW", "OY", "UH", "UW"}


def letter_to_sound(word: str) -> list[str]:
    """Rule-based fallback: digraphs first, then per-letter mapping.

    The first vowel receives primary stress, later vowels no stress.
    """
    word = word.lower()
    # Final silent 'e' heuristic for words of 3+ letters.
    if len(word) >= 3 and word.endswith("e") and word[-2] not in "aeiou":
        word = word[:-1]
    phones: list[str] = []
    i = 0
    while i < len(word):
        for pattern, mapped in _DIGRAPH_RULES:
            if word.startswith(pattern, i):
                phones.extend(mapped)
                i += len(pattern)
                break
        else:
            mapped = _LETTER_RULES.get(word[i])
            if mapped:
                phones.extend(mapped)
            i += 1
    stressed: list[str] = []
    seen_vowel = False
    for ph in phones:
        if ph in _VOWEL_BASES:
            stressed.append(ph + ("0" if seen_vowel else "1"))
            seen_vowel = True
        else:
            stressed.append(ph)
    return stressed


def lookup(word: str) -> list[str] | None:
    return LEXICON.get(word.lower())
