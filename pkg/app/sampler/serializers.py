from django.conf import settings
from rest_framework import serializers

from core.ising import exact_limit

from .config import ENGINES, EXACT_ENGINES, RunConfig


class RunConfigSerializer(serializers.Serializer):
    """Serializer validating a sampler run configuration.

    Fields left out fall back to ``settings.MULTISING['RUN']``. Pass the
    number of variables as ``context['p']`` to check engine compatibility.
    """
    engine = serializers.ChoiceField(choices=ENGINES, required=False)
    iterations = serializers.IntegerField(min_value=0, required=False)
    burn_in = serializers.IntegerField(min_value=0, required=False)
    thin = serializers.IntegerField(min_value=1, required=False)
    seed = serializers.IntegerField(min_value=0, required=False)
    g = serializers.FloatField(min_value=0, required=False)
    alpha = serializers.FloatField(min_value=0, required=False)
    beta = serializers.FloatField(min_value=0, required=False)
    omega = serializers.FloatField(min_value=0, max_value=1,
                                   required=False)
    omega_adjacent = serializers.FloatField(min_value=0, max_value=1,
                                            required=False, allow_null=True)
    a = serializers.FloatField(min_value=0, required=False)
    b = serializers.FloatField(min_value=0, required=False)
    rho = serializers.FloatField(min_value=0, required=False,
                                 allow_null=True)
    gamma = serializers.FloatField(min_value=0, required=False,
                                   allow_null=True)
    sigma = serializers.FloatField(min_value=0, required=False)
    theta_proposal_alpha = serializers.FloatField(min_value=0,
                                                  required=False)
    theta_proposal_beta = serializers.FloatField(min_value=0, required=False)
    nu_proposal_a = serializers.FloatField(min_value=0, required=False)
    nu_proposal_b = serializers.FloatField(min_value=0, required=False)
    edge_prob = serializers.FloatField(min_value=0, max_value=1,
                                       required=False, allow_null=True)
    coupling_likelihood = serializers.ChoiceField(
        choices=('joint', 'pseudo'), required=False
    )
    scan = serializers.ChoiceField(choices=('systematic', 'random'),
                                   required=False)
    cutoff = serializers.FloatField(min_value=0, max_value=1, required=False)
    fdr_bound = serializers.FloatField(min_value=0, max_value=1,
                                       required=False)
    sweeps = serializers.IntegerField(min_value=1, required=False)
    tune_step_size = serializers.BooleanField(required=False)
    laplace_cache_size = serializers.IntegerField(min_value=1,
                                                  required=False)
    laplace_failure_rate = serializers.FloatField(min_value=0, max_value=1,
                                                  required=False)
    keep_lambda = serializers.BooleanField(required=False)
    log_every = serializers.IntegerField(min_value=0, required=False)

    POSITIVE = ('g', 'alpha', 'beta', 'a', 'b', 'sigma',
                'theta_proposal_alpha', 'theta_proposal_beta',
                'nu_proposal_a', 'nu_proposal_b')

    def validate(self, attrs):
        """Check cross-field rules on the fully materialized values."""
        values = dict(settings.MULTISING['RUN'])
        values.update(attrs)
        errors = {}
        for name in self.POSITIVE:
            if values[name] <= 0:
                errors[name] = 'Must be strictly positive.'
        if values['iterations'] <= values['burn_in']:
            errors['iterations'] = 'Must exceed burn_in.'
        if values['cutoff'] >= 1:
            errors['cutoff'] = 'Must lie in [0, 1).'
        rho, gamma = values.get('rho'), values.get('gamma')
        if rho is not None and gamma is not None and not rho > gamma > 0:
            errors['rho'] = 'Spike-and-slab variances need rho > gamma > 0.'
        edge_prob = values.get('edge_prob')
        if edge_prob is not None and not 0 < edge_prob < 1:
            errors['edge_prob'] = 'Must lie strictly inside (0, 1).'
        p = self.context.get('p')
        if p is not None and values['engine'] in EXACT_ENGINES \
                and p > exact_limit():
            errors['engine'] = (
                f'{values["engine"]} supports at most {exact_limit()} '
                f'variables, got p={p}; use ab or abs.'
            )
        if errors:
            raise serializers.ValidationError(errors)
        return attrs

    def create(self, validated_data):
        """Return the immutable RunConfig."""
        return RunConfig.build(**validated_data)
