from rest_framework import serializers


class MatrixField(serializers.Field):
    """Read-only field rendering a numpy array as nested lists."""

    def __init__(self, **kwargs):
        kwargs['read_only'] = True
        super().__init__(**kwargs)

    def to_representation(self, value):
        return value.tolist()


class DegenerateFloatField(serializers.Field):
    """A float, or the name of the marker standing in for it."""

    def __init__(self, **kwargs):
        kwargs['read_only'] = True
        super().__init__(**kwargs)

    def to_representation(self, value):
        if isinstance(value, str):
            return str(value)
        return float(value)


class PpiTableSerializer(serializers.Serializer):
    """Serializer for a table of edge inclusion probabilities."""
    burn_in = serializers.IntegerField(read_only=True)
    retained = serializers.IntegerField(read_only=True)
    labels = serializers.ListField(child=serializers.CharField(),
                                   read_only=True)
    edges = serializers.SerializerMethodField()
    values = MatrixField()

    def get_edges(self, obj):
        return [list(label) for label in obj.edge_labels()]


class SelectedGraphsSerializer(serializers.Serializer):
    """Serializer for the selected graph of every group."""
    cutoff = serializers.FloatField(read_only=True)
    labels = serializers.ListField(child=serializers.CharField(),
                                   read_only=True)
    edges = serializers.SerializerMethodField()
    edge_counts = serializers.SerializerMethodField()

    def get_edges(self, obj):
        return [[list(edge) for edge in graph.edges()] for graph in obj]

    def get_edge_counts(self, obj):
        return obj.edge_counts()


class ChainSummarySerializer(serializers.Serializer):
    """Serializer for the summaries of one chain."""
    ppi = PpiTableSerializer(read_only=True)
    selected = SelectedGraphsSerializer(read_only=True)
    theta_ppi = MatrixField()
    sec = MatrixField()
    fdr = DegenerateFloatField()
    fdr_bound = serializers.FloatField(read_only=True)


class QuantileGraphsSerializer(serializers.Serializer):
    """Serializer for graphs selected at block-frequency quantiles."""
    blocks = serializers.IntegerField(read_only=True)
    cutoff = serializers.FloatField(read_only=True)
    levels = serializers.SerializerMethodField()
    edge_counts = serializers.SerializerMethodField()
    graphs = serializers.SerializerMethodField()

    def get_levels(self, obj):
        return [str(level) for level in obj.levels]

    def get_edge_counts(self, obj):
        return obj.edge_counts()

    def get_graphs(self, obj):
        return {
            str(level): SelectedGraphsSerializer(obj.graphs[level]).data
            for level in obj.levels
        }
