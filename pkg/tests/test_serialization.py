# -*- coding: utf-8 -*-
"""serialization：文档分派、有理数格式与错误输入"""

import json
from fractions import Fraction

import pytest

from engine.configurations import Rectangle, con_of, mat_of
from engine.errors import ConfigurationError, PreconditionError
from engine.exact_linalg import RationalMatrix
from engine.geometry import Flat
from engine.search import rs_exact
from engine.set_families import GridFamilyParams, grid_family
from utils.serialization import (
    biclique_from_json,
    biclique_to_json,
    configuration_to_json,
    dumps,
    family_pair_to_json,
    flat_to_json,
    load_document,
    matrix_to_json,
    rectangle_to_json,
)


class TestMatrixDocuments:
    def test_fractions_as_strings(self):
        M = RationalMatrix.from_rows([[Fraction(1, 2), 3]])
        doc = matrix_to_json(M)
        assert doc["entries"] == [["1/2", "3"]]
        kind, back = load_document(json.dumps(doc))
        assert kind == "matrix" and back == M

    def test_kind_is_guessed(self):
        kind, M = load_document('{"entries": [[1, 0], [0, 1]]}')
        assert kind == "matrix" and M == RationalMatrix.identity(2)

    def test_shape_mismatch(self):
        with pytest.raises(PreconditionError):
            load_document('{"kind": "matrix", "rows": 2, "cols": 2, "entries": [[1, 0]]}')

    def test_floats_rejected(self):
        with pytest.raises(PreconditionError):
            load_document('{"entries": [[0.5]]}')


class TestConfigurationDocuments:
    def test_partition_survives(self):
        c, pp = con_of(RationalMatrix.from_rows([[1, 2], [3, 4], [5, 6]]))
        kind, (c2, pp2) = load_document(dumps(configuration_to_json(c, pp)))
        assert kind == "configuration"
        assert c2 == c and pp2 == pp
        assert mat_of(c2, pp2) == mat_of(c, pp)

    def test_partition_as_bare_block_list(self):
        doc = {"points": [[0], [1]], "hyperplanes": [{"normal": [1], "offset": 0},
                                                    {"normal": [1], "offset": 1}],
               "partition": [[0, 1]]}
        _, (c, pp) = load_document(doc)
        assert c.dim == 1
        assert pp.blocks == ((0, 1),) and pp.block_size_bound == 2

    def test_duplicate_hyperplanes_keep_their_error(self):
        doc = {"points": [[0]], "hyperplanes": [{"normal": [1]}, {"normal": [2]}]}
        with pytest.raises(ConfigurationError):
            load_document(doc)

    def test_set_families_default_to_symmetric(self):
        fp = grid_family(GridFamilyParams(2, 2))
        doc = family_pair_to_json(fp)
        del doc["family_B"]
        kind, back = load_document(doc)
        assert kind == "set_families"
        assert back.family_B == fp.family_A


class TestWitnessDocuments:
    def test_biclique_round_trip(self):
        c, _ = con_of(RationalMatrix.from_rows([[1, 1], [1, 1]]))
        bic = rs_exact(c)
        doc = biclique_to_json(bic)
        assert doc["edges"] == 2
        assert biclique_from_json(json.loads(dumps(doc))) == bic

    def test_flat_document(self):
        f = Flat.from_system([(1, 1, 2)], 2)
        kind, back = load_document(flat_to_json(f))
        assert kind == "flat" and back == f
        _, empty = load_document(flat_to_json(Flat.empty_flat(2)))
        assert empty.empty

    def test_rectangle_value(self):
        doc = rectangle_to_json(Rectangle((1, 0), (2,)), Fraction(-3, 2))
        assert doc == {"kind": "rectangle", "rows": [0, 1], "cols": [2], "size": 2, "value": "-3/2"}


class TestErrors:
    @pytest.mark.parametrize("text", ["not json", "[1, 2]", '{"kind": "weird"}', '{"foo": 1}'])
    def test_rejected(self, text):
        with pytest.raises(PreconditionError):
            load_document(text)

    def test_dumps_is_sorted(self):
        assert dumps({"b": 1, "a": 2}).index('"a"') < dumps({"b": 1, "a": 2}).index('"b"')
