from rest_framework import serializers

from core.ising import exact_limit
from sampler.config import ENGINES, EXACT_ENGINES
from sampler.serializers import RunConfigSerializer

from .scenarios import KINDS
from .study import StudyConfig


class StudyConfigSerializer(serializers.Serializer):
    """Serializer validating a replicated simulation study."""
    kinds = serializers.ListField(
        child=serializers.ChoiceField(choices=KINDS), min_length=1,
        required=False,
    )
    methods = serializers.ListField(
        child=serializers.ChoiceField(choices=ENGINES), min_length=1,
        required=False,
    )
    replicates = serializers.IntegerField(min_value=2, required=False)
    p = serializers.IntegerField(min_value=2, required=False)
    q = serializers.IntegerField(min_value=2, required=False)
    n_per_group = serializers.IntegerField(min_value=1, required=False)
    iterations = serializers.IntegerField(min_value=1, required=False)
    burn_in = serializers.IntegerField(min_value=0, required=False)
    thin = serializers.IntegerField(min_value=1, required=False)
    seed = serializers.IntegerField(min_value=0, required=False)
    cutoff = serializers.FloatField(min_value=0, max_value=1,
                                    required=False)
    workers = serializers.IntegerField(min_value=1, required=False)
    main_effect = serializers.FloatField(required=False)
    interaction = serializers.FloatField(required=False)
    gibbs_burn_in = serializers.IntegerField(min_value=0, required=False)
    gibbs_thin = serializers.IntegerField(min_value=1, required=False)
    run = RunConfigSerializer(required=False)

    def validate(self, attrs):
        defaults = StudyConfig()
        values = {name: getattr(defaults, name) for name in (
            'kinds', 'methods', 'p', 'q', 'iterations', 'burn_in', 'cutoff'
        )}
        values.update(attrs)
        errors = {}
        if values['iterations'] <= values['burn_in']:
            errors['iterations'] = 'Must exceed burn_in.'
        if values['cutoff'] >= 1:
            errors['cutoff'] = 'Must lie in [0, 1).'
        if values['q'] != 4 and set(values['kinds']) & {'C', 'D'}:
            errors['kinds'] = 'Scenarios C and D are defined for q = 4.'
        if values['p'] > exact_limit() \
                and set(values['methods']) & set(EXACT_ENGINES):
            errors['methods'] = (
                f'fb and fbs support at most {exact_limit()} variables, '
                f'got p={values["p"]}; use ab or abs.'
            )
        if errors:
            raise serializers.ValidationError(errors)
        return attrs

    def create(self, validated_data):
        """Return the immutable StudyConfig."""
        data = dict(validated_data)
        for name in ('kinds', 'methods'):
            if name in data:
                data[name] = tuple(data[name])
        if 'run' in data:
            data['run'] = dict(data['run'])
        return StudyConfig(**data)


class StudyReportSerializer(serializers.Serializer):
    """Serializer for the summary of a replicated study."""
    replicates = serializers.IntegerField(read_only=True)
    config = serializers.DictField(read_only=True)
    table = serializers.SerializerMethodField()

    def get_table(self, obj):
        return obj.table.reset_index().to_dict(orient='records')
