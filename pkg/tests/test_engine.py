from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vcmmap.engine import (
    GENERIC_ICON,
    assemble,
    batch_generate,
    choose_color,
    choose_shape,
    format_report,
    generate_icons,
    prune_less_specific,
)
from vcmmap.errors import ModifierOverflowError, NotFoundError, UnknownPrimitiveError
from vcmmap.vcm import MODIFIER, PICTOGRAM, Icon, icon_code, is_consistent, is_more_specific

from tests.helpers import corpus_ids
from tests.oracles import AssemblyOracle


def prims(picts=(), mods=()):
    return [(PICTOGRAM, p) for p in picts] + [(MODIFIER, m) for m in mods]


def codes(icons):
    return [icon_code(i) for i in icons]


def test_assemble_single(ont):
    assert codes(assemble(ont, prims(["eye"], ["inflammation"]))) == ["current.patho.eye.inflammation"]


def test_assemble_two_pictograms(ont):
    assert codes(assemble(ont, prims(["eye", "ent"], ["virus"]))) == [
        "current.patho.ent.virus",
        "current.patho.eye.virus",
    ]


def test_assemble_empty_is_generic(ont):
    assert assemble(ont, []) == [GENERIC_ICON]
    assert codes(assemble(ont, [])) == ["current.patho._._"]


def test_assemble_forbidden_pair_splits(ont):
    # both modifiers together are forbidden, so two icons survive and neither dominates
    out = assemble(ont, prims(["thyroid"], ["hyperfunction", "hypofunction"]))
    assert codes(out) == ["current.patho.thyroid.hyperfunction", "current.patho.thyroid.hypofunction"]
    assert not is_more_specific(ont, out[0], out[1])
    assert not is_more_specific(ont, out[1], out[0])


def test_assemble_forbidden_without_pictogram(ont):
    assert codes(assemble(ont, prims([], ["hyperfunction"]))) == ["current.patho._._"]


def test_assemble_prefers_specific_pictogram_and_modifier(ont):
    assert codes(assemble(ont, prims(["thyroid", "endocrine"], ["infection", "virus"]))) == ["current.patho.thyroid.virus"]


def test_assemble_colour_and_shape(ont):
    out = assemble(ont, [("color", "past"), ("color", "risk")] + prims(["heart"]))
    assert codes(out) == ["past.patho.heart._"]
    out = assemble(ont, [("base_shape", "physio")] + prims(["pregnancy"]))
    assert codes(out) == ["current.physio.pregnancy._"]
    assert codes(assemble(ont, prims(["heart"]), color="risk", shape="physio")) == ["risk.physio.heart._"]


def test_choose_color_shape():
    assert choose_color([]) == "current"
    assert choose_color([("color", "risk"), ("color", "current")]) == "risk"
    assert choose_color([("color", "risk"), ("color", "past")]) == "past"
    assert choose_shape([]) == "patho"
    assert choose_shape([("base_shape", "physio")]) == "physio"
    assert choose_shape([("base_shape", "physio"), ("base_shape", "patho")]) == "patho"


def test_modifier_overflow(ont):
    every = prims(["eye"], ont.codes(MODIFIER))
    assert len(every) == 12
    with pytest.raises(ModifierOverflowError) as err:
        assemble(ont, every)
    assert err.value.count == 11 and err.value.limit == 10
    with pytest.raises(ModifierOverflowError):
        assemble(ont, prims(["eye"], ["pain", "vessel"]), max_modifiers=1)


def test_unknown_primitive(ont):
    with pytest.raises(UnknownPrimitiveError, match="spleen"):
        assemble(ont, prims(["spleen"]))


def test_prune_less_specific(ont):
    a, b, c = Icon(pictogram="eye"), Icon(pictogram="eye", modifiers={"pain"}), Icon(pictogram="ear")
    assert prune_less_specific(ont, [a, b, c, b]) == [Icon(pictogram="ear"), b]
    # different colours never dominate each other
    d = Icon("past", "patho", "eye")
    assert set(prune_less_specific(ont, [a, d])) == {a, d}


_picts = st.lists(st.sampled_from(["eye", "ent", "thyroid", "endocrine", "diabetes", "pregnancy", "cns", "nervous_system"]), max_size=3)
_mods = st.lists(st.sampled_from(["inflammation", "infection", "virus", "bacterium", "tumor", "cancer", "hyperfunction", "hypofunction", "pain"]), max_size=5)


@settings(max_examples=300, deadline=None)
@given(picts=_picts, mods=_mods, color=st.sampled_from(["current", "risk", "past"]), shape=st.sampled_from(["patho", "physio"]))
def test_assemble_matches_oracle(ont, picts, mods, color, shape):
    oracle = AssemblyOracle(ont)
    got = assemble(ont, prims(picts, mods), color=color, shape=shape)
    assert set(got) == oracle.assemble(picts, mods, color, shape)
    assert codes(got) == sorted(codes(got))


EXPECTED = {
    34486009: ["current.patho.thyroid.hyperfunction"],
    40930008: ["current.patho.thyroid.hypofunction"],
    9050003: ["current.patho.liver.inflammation+virus"],
    9050010: ["current.patho.lung.bacterium+inflammation"],
    9050013: ["past.patho.heart._"],
    9050017: ["risk.patho.heart._"],
    77386006: ["current.physio.pregnancy._"],
    9050014: ["current.patho.kidney.bacterium+inflammation", "current.patho.lung.bacterium+inflammation"],
    9050015: ["current.patho.diabetes._", "current.patho.eye._"],
    267022002: ["current.patho._._"],
}


@pytest.mark.parametrize("concept", sorted(EXPECTED))
def test_generate_icons(graph, ont, table, concept):
    assert generate_icons(graph, ont, table, concept).codes == EXPECTED[concept]


def test_generate_without_overrides(graph, ont, base_table):
    assert generate_icons(graph, ont, base_table, 9050006).codes == ["current.patho.bone._", "current.patho.ear._"]


def test_generate_unknown(graph, ont, table):
    with pytest.raises(NotFoundError):
        generate_icons(graph, ont, table, 1)


def test_generate_respects_modifier_limit(graph, ont, table):
    with pytest.raises(ModifierOverflowError):
        generate_icons(graph, ont, table, 9050003, max_modifiers=1)


def test_invariants_over_fixture(graph, ont, table):
    for cid in graph.concepts:
        result = generate_icons(graph, ont, table, cid)
        icons = list(result.icons)
        assert icons, cid
        assert codes(icons) == sorted(set(codes(icons)))
        assert all(is_consistent(ont, i) for i in icons)
        for a in icons:
            for b in icons:
                assert not is_more_specific(ont, a, b), (cid, a, b)
        group_icons = {i for g in result.report.groups for i in g.icons}
        assert set(icons) <= group_icons
        for i in group_icons - set(icons):
            assert any(is_more_specific(ont, k, i) for k in icons)
        for g in result.report.groups:
            assert g.counts.survivors == len(g.icons)
        assert result.report.merged_candidates - result.report.merged_removed == len(icons)


def test_report_text(graph, ont, table):
    text = format_report(generate_icons(graph, ont, table, 4927003).report, graph)
    lines = text.splitlines()
    assert lines[0].startswith("concept: 4927003 ")
    assert "  step1 finding_site: 9010010 Anterior uveal tract structure" in lines
    assert any(l.startswith("  step2 9010010: {eye} depth=2") for l in lines)
    assert "  step3 retained: {eye, inflammation_process}" in lines
    assert any("icons=current.patho.eye.inflammation" in l for l in lines)
    assert lines[-1] == "merge: candidates=1 removed=0"


def test_batch_empty(graph, ont, table):
    assert batch_generate(graph, ont, table, []) == []


def test_batch_isolates_failures(graph, ont, table):
    out = batch_generate(graph, ont, table, [34486009, 1, 4927003])
    assert [e.ok for e in out] == [True, False, True]
    assert "1" in out[1].error
    assert out[2].icon_set.codes == ["current.patho.eye.inflammation"]


def test_parallel_equals_sequential(graph, ont, table):
    ids = corpus_ids() + [1]
    assert batch_generate(graph, ont, table, ids, workers=2) == batch_generate(graph, ont, table, ids)
