import pytest

from drugmatch.records import DrugRecord, MatchLabel, RecordPair


def make_pair(
    name1="叶酸片",
    dosage1="",
    manufacturer1="厂一",
    approval1="H20044917",
    name2="叶酸片",
    dosage2="",
    manufacturer2="厂二",
    approval2="H20044917",
    label=None,
):
    return RecordPair(
        source1=DrugRecord(name=name1, dosage_raw=dosage1, manufacturer=manufacturer1, approval_raw=approval1),
        source2=DrugRecord(name=name2, dosage_raw=dosage2, manufacturer=manufacturer2, approval_raw=approval2),
        gold_label=label,
    )


@pytest.fixture
def pair_factory():
    return make_pair


MATCH = MatchLabel.MATCH
NO_MATCH = MatchLabel.NO_MATCH
