import json
import math
from enum import Enum

import numpy as np
from django.conf import settings
from rest_framework import serializers

from .dictionary import Construction, SupportSet
from .exceptions import InvalidParams

SCENARIO_TASKS = ['gen', 'solve', 'check', 'relax', 'reproduce', 'sweep']
DICTIONARY_TASKS = {'gen', 'solve', 'check', 'relax'}


class SupportSetField(serializers.Field):
    """SupportSet as a JSON list of indices; accepts a list or a "0,2,5" string."""

    def to_representation(self, value):
        return list(value)

    def to_internal_value(self, data):
        try:
            if isinstance(data, str):
                return SupportSet.parse(data)
            return SupportSet.of(int(i) for i in data)
        except (TypeError, ValueError) as exc:
            raise serializers.ValidationError(str(exc))


class FloatListField(serializers.ListField):
    child = serializers.FloatField()


class ConditionReportSerializer(serializers.Serializer):
    name = serializers.CharField()
    value = serializers.FloatField()
    threshold = serializers.FloatField()
    relation = serializers.CharField(source='relation.value')
    satisfied = serializers.BooleanField()
    exact = serializers.BooleanField()
    context = serializers.DictField()
    notes = serializers.DictField()


class IterationSerializer(serializers.Serializer):
    selected = serializers.IntegerField()
    candidates = serializers.ListField(child=serializers.IntegerField())
    scores = FloatListField()
    tie = serializers.BooleanField()
    margin = serializers.FloatField()
    residual_norm = serializers.FloatField()


class GreedyTraceSerializer(serializers.Serializer):
    variant = serializers.CharField(source='variant.value')
    tie_policy = serializers.CharField(source='tie_policy.value')
    initial_support = SupportSetField()
    initial_residual_norm = serializers.FloatField()
    iterations = IterationSerializer(many=True)
    final_support = SupportSetField()
    terminated_reason = serializers.CharField(source='terminated_reason.value')


class MinimizerVerdictSerializer(serializers.Serializer):
    status = serializers.CharField(source='status.value')
    objective_star = serializers.FloatField()
    kernel_dim = serializers.IntegerField()
    witness = FloatListField(allow_null=True)
    objective_witness = serializers.FloatField(allow_null=True)
    step = FloatListField(allow_null=True)


class P0SolutionSerializer(serializers.Serializer):
    unique = serializers.BooleanField()
    extra_size = serializers.IntegerField()
    extra_supports = serializers.ListField(child=SupportSetField())
    solutions = serializers.SerializerMethodField()

    def get_solutions(self, obj):
        return [[float(v) for v in solution.entries] for solution in obj.solutions]


class GeneratorMetadataSerializer(serializers.Serializer):
    construction = serializers.CharField()
    params = serializers.DictField()
    k = serializers.IntegerField(allow_null=True)
    g = serializers.IntegerField(allow_null=True)
    b = serializers.IntegerField(allow_null=True)
    mu = serializers.FloatField(allow_null=True)
    canonical_Q = SupportSetField(source='canonical_q', allow_null=True)
    canonical_Qstar = SupportSetField(source='canonical_q_star', allow_null=True)
    notes = serializers.DictField()


class ReproCheckSerializer(serializers.Serializer):
    name = serializers.CharField()
    measured = serializers.FloatField()
    expected = serializers.FloatField()
    relation = serializers.CharField(source='relation.value')
    tolerance = serializers.FloatField()
    provenance = serializers.CharField()
    passed = serializers.BooleanField()


class ReproReportSerializer(serializers.Serializer):
    claim_id = serializers.CharField()
    passed = serializers.BooleanField()
    checks = ReproCheckSerializer(many=True)
    parameters = serializers.DictField()
    runtime_s = serializers.SerializerMethodField()

    def get_runtime_s(self, obj):
        if not self.context.get('timings'):
            return None
        return round(obj.runtime_s, 6)

    def to_representation(self, instance):
        data = super().to_representation(instance)
        if not self.context.get('timings'):
            data.pop('runtime_s')
        return data


class DictionarySourceSerializer(serializers.Serializer):
    """Either a CSV path or a named construction with parameters."""
    path = serializers.CharField(required=False)
    construction = serializers.ChoiceField(choices=[c.value for c in Construction], required=False)
    params = serializers.DictField(required=False, default=dict)
    normalize = serializers.BooleanField(required=False, default=False)

    def validate(self, attrs):
        if bool(attrs.get('path')) == bool(attrs.get('construction')):
            raise serializers.ValidationError('give exactly one of "path" or "construction"')
        return attrs


class TolerancesSerializer(serializers.Serializer):
    rank_tol = serializers.FloatField(required=False, min_value=0.0, max_value=1e-3)
    tie_tol = serializers.FloatField(required=False, min_value=0.0, max_value=1e-3)
    cert_tol = serializers.FloatField(required=False, min_value=0.0, max_value=1e-3)


class ScenarioSerializer(serializers.Serializer):
    dictionary = DictionarySourceSerializer(required=False)
    task = serializers.ChoiceField(choices=SCENARIO_TASKS)
    params = serializers.DictField(required=False, default=dict)
    seed = serializers.IntegerField(required=False, min_value=0)
    output = serializers.CharField(required=False, allow_blank=True)
    tolerances = TolerancesSerializer(required=False)

    def validate(self, attrs):
        if attrs['task'] in DICTIONARY_TASKS and 'dictionary' not in attrs:
            raise serializers.ValidationError({'dictionary': f"task {attrs['task']!r} needs a dictionary source"})
        attrs.setdefault('seed', getattr(settings, 'SPARSECERT_SEED', 0))
        return attrs


def _finite(value):
    if isinstance(value, SupportSet):
        return list(value)
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dict):
        return {str(key): _finite(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite(item) for item in value]
    if isinstance(value, np.ndarray):
        return _finite(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def render_json(data) -> str:
    """Stable JSON: sorted keys, two-space indent, non-finite floats as null."""
    return json.dumps(_finite(data), sort_keys=True, indent=2)


def validation_message(errors) -> str:
    """Flatten DRF error detail into a one-line message."""
    if isinstance(errors, dict):
        return '; '.join(f"{key}: {validation_message(value)}" for key, value in errors.items())
    if isinstance(errors, list):
        return ', '.join(validation_message(item) for item in errors)
    return str(errors)


def parse_support(value, n: int | None = None) -> SupportSet:
    field = SupportSetField()
    try:
        support = field.to_internal_value(value)
    except serializers.ValidationError as exc:
        raise InvalidParams(validation_message(exc.detail)) from exc
    return support.validate(n) if n is not None else support
