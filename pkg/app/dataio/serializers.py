from rest_framework import serializers

from .ingest import IngestSpec, VariableRule


class VariableRuleSerializer(serializers.Serializer):
    """How one survey column maps to 0/1."""
    ones = serializers.ListField(child=serializers.CharField(),
                                 required=False, default=list)
    zeros = serializers.ListField(child=serializers.CharField(),
                                  required=False, allow_null=True,
                                  default=None)
    identity = serializers.BooleanField(required=False, default=False)

    def validate(self, attrs):
        if attrs['identity'] == bool(attrs['ones']):
            raise serializers.ValidationError(
                'Either set identity or list the values coded 1.'
            )
        zeros = attrs['zeros']
        if zeros is not None and set(attrs['ones']) & set(zeros):
            raise serializers.ValidationError(
                'A value cannot be coded both 1 and 0.'
            )
        return attrs

    def create(self, validated_data):
        zeros = validated_data['zeros']
        return VariableRule(
            ones=frozenset(validated_data['ones']),
            zeros=None if zeros is None else frozenset(zeros),
            identity=validated_data['identity'],
        )


class IngestSpecSerializer(serializers.Serializer):
    """Serializer validating a survey ingestion spec.

    Grouping uses either explicit ``thresholds`` or a number of
    ``quantiles``, never both.
    """
    variables = serializers.DictField(child=VariableRuleSerializer(),
                                      allow_empty=False)
    group = serializers.CharField()
    thresholds = serializers.ListField(child=serializers.FloatField(),
                                       min_length=1, required=False)
    quantiles = serializers.IntegerField(min_value=2, required=False)
    group_labels = serializers.ListField(child=serializers.CharField(),
                                         required=False)
    missing = serializers.ListField(child=serializers.CharField(),
                                    required=False, default=list)

    def validate_thresholds(self, value):
        if any(b <= a for a, b in zip(value, value[1:])):
            raise serializers.ValidationError('Must be strictly increasing.')
        return value

    def validate(self, attrs):
        thresholds = attrs.get('thresholds')
        quantiles = attrs.get('quantiles')
        if (thresholds is None) == (quantiles is None):
            raise serializers.ValidationError(
                'Give exactly one of thresholds and quantiles.'
            )
        n_groups = quantiles if thresholds is None else len(thresholds) + 1
        labels = attrs.get('group_labels')
        if labels is not None and len(labels) != n_groups:
            raise serializers.ValidationError(
                {'group_labels': f'Expected {n_groups} labels.'}
            )
        if attrs['group'] in attrs['variables']:
            raise serializers.ValidationError(
                {'group': 'The grouping column cannot be a response.'}
            )
        return attrs

    def create(self, validated_data):
        """Return the immutable IngestSpec."""
        rules = VariableRuleSerializer()
        variables = {
            name: rules.create(rule)
            for name, rule in validated_data['variables'].items()
        }
        thresholds = validated_data.get('thresholds')
        labels = validated_data.get('group_labels')
        return IngestSpec(
            variables=variables,
            group=validated_data['group'],
            thresholds=None if thresholds is None else tuple(thresholds),
            quantiles=validated_data.get('quantiles'),
            group_labels=None if labels is None else tuple(labels),
            missing=tuple(validated_data['missing']),
        )


class IngestReportSerializer(serializers.Serializer):
    rows_read = serializers.IntegerField(read_only=True)
    rows_dropped = serializers.IntegerField(read_only=True)
    thresholds = serializers.ListField(child=serializers.FloatField(),
                                       read_only=True)
    group_sizes = serializers.DictField(child=serializers.IntegerField(),
                                        read_only=True)
    columns = serializers.ListField(child=serializers.CharField(),
                                    read_only=True)
