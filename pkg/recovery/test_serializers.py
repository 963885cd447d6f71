"""
Tests for report serializers, scenario validation and JSON rendering.
"""
import json
import math

import numpy as np
import pytest

from recovery.conditions import ConditionReport
from recovery.dictionary import SupportSet, generate
from recovery.exceptions import InvalidParams
from recovery.serializers import (
    ConditionReportSerializer,
    GeneratorMetadataSerializer,
    ScenarioSerializer,
    SupportSetField,
    parse_support,
    render_json,
    validation_message,
)


class TestRenderJson:
    def test_non_finite_floats_become_null(self):
        data = json.loads(render_json({'a': math.inf, 'b': math.nan, 'c': 1.5}))
        assert data == {'a': None, 'b': None, 'c': 1.5}

    def test_numpy_and_support_values(self):
        rendered = render_json({'x': np.array([1.0, 2.0]), 'n': np.int64(3), 'flag': np.bool_(True),
                                'support': SupportSet((0, 2))})
        assert json.loads(rendered) == {'x': [1.0, 2.0], 'n': 3, 'flag': True, 'support': [0, 2]}

    def test_keys_are_sorted(self):
        rendered = render_json({'b': 1, 'a': 2})
        assert rendered.index('"a"') < rendered.index('"b"')


class TestSupportSetField:
    def test_accepts_string_and_list(self):
        field = SupportSetField()
        assert field.to_internal_value('2,0').indices == (0, 2)
        assert field.to_internal_value([3, 1]).indices == (1, 3)

    def test_parse_support_errors(self):
        with pytest.raises(InvalidParams):
            parse_support([1, 1])
        with pytest.raises(InvalidParams):
            parse_support('0,4', n=4)


class TestReportSerializers:
    def test_condition_report(self):
        report = ConditionReport('coherence_main', 0.2, 0.2, context={'k': 3})
        data = ConditionReportSerializer(report).data
        assert data['relation'] == '<'
        assert data['satisfied'] is False
        assert data['context'] == {'k': 3}

    def test_generator_metadata(self):
        _, meta = generate('equiangular', k=3, g=1, b=1)
        data = GeneratorMetadataSerializer(meta).data
        assert data['construction'] == 'equiangular'
        assert data['canonical_Q'] == [0, 1]
        assert data['canonical_Qstar'] == [0, 2, 3]
        assert data['mu'] == pytest.approx(0.2)


class TestScenarioSerializer:
    """Scenario file validation."""

    def test_seed_defaults_to_settings(self, settings):
        settings.SPARSECERT_SEED = 42
        serializer = ScenarioSerializer(data={'task': 'reproduce', 'params': {'claims': ['lemma1']}})
        assert serializer.is_valid(), serializer.errors
        assert serializer.validated_data['seed'] == 42

    def test_dictionary_task_needs_a_source(self):
        serializer = ScenarioSerializer(data={'task': 'check'})
        assert not serializer.is_valid()
        assert 'dictionary' in validation_message(serializer.errors)

    def test_source_is_exclusive(self):
        serializer = ScenarioSerializer(data={
            'task': 'gen',
            'dictionary': {'path': 'A.csv', 'construction': 'identity'},
        })
        assert not serializer.is_valid()

    def test_unknown_task(self):
        serializer = ScenarioSerializer(data={'task': 'plot'})
        assert not serializer.is_valid()
        assert 'task' in serializer.errors

    def test_tolerance_range(self):
        serializer = ScenarioSerializer(data={'task': 'reproduce', 'tolerances': {'rank_tol': 0.5}})
        assert not serializer.is_valid()
