import pytest

from ebmatch import load_function_word_lexicon, load_tag_lexicon

FW_TSV = """\
# surface<TAB>group[,group...]
the\tDET
a\tDET
an\tDET
of\tPREP,GEN
for\tPREP
in\tPREP
on\tPREP
with\tPREP
to\tPREP,INF
and\tCONJ
or\tCONJ
was\tAUX
is\tAUX
out\tPART
off\tPART
down\tPART
aside\tPART
"""

TAG_TSV = """\
export\tnoun,verb\texport
exports\tnoun,verb\texport
refund\tnoun,verb\trefund
refunds\tnoun\trefund
cereals\tnoun\tcereal
cereal\tnoun\tcereal
rice\tnoun\trice
sugar\tnoun\tsugar
wheat\tnoun\twheat
quota\tnoun\tquota
levy\tnoun\tlevy
market\tnoun\tmarket
payment\tnoun\tpayment
eat\tverb\teat
fixed\tverb,adj\tfix
paid\tverb\tpay
granted\tverb\tgrant
set\tverb,noun\tset
slowly\tadv\tslowly
quickly\tadv\tquickly
red\tadj\tred
green\tadj\tgreen
"""


@pytest.fixture(scope="session")
def fwlex():
    return load_function_word_lexicon(FW_TSV)


@pytest.fixture(scope="session")
def taglex():
    return load_tag_lexicon(TAG_TSV)


@pytest.fixture(scope="session")
def lexicon_files(tmp_path_factory):
    root = tmp_path_factory.mktemp("lexicons")
    fw_path = root / "fw.tsv"
    tag_path = root / "tags.tsv"
    fw_path.write_text(FW_TSV, encoding="utf-8")
    tag_path.write_text(TAG_TSV, encoding="utf-8")
    return str(fw_path), str(tag_path)
