"""Survey CSV ingestion: dichotomized responses split by a grouping column.

Each response column is mapped to 0/1 by its rule. The grouping column is
numeric and cut at increasing thresholds into right-closed intervals, so a
value equal to a threshold falls in the lower group. Thresholds are given
explicitly or taken as empirical (type 7) quantiles.
"""
import logging
from collections import namedtuple
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from core.exceptions import ConfigError, DataError
from core.models import BinaryDataset, GroupedData

logger = logging.getLogger(__name__)

Ingested = namedtuple('Ingested', ['data', 'report'])


@dataclass(frozen=True)
class VariableRule:
    """Values coded 1; with ``zeros`` set, anything else is an error."""
    ones: frozenset = frozenset()
    zeros: frozenset = None
    identity: bool = False

    def __post_init__(self):
        if self.identity == bool(self.ones):
            raise ConfigError('A rule is either identity or lists the '
                              'values coded 1.')
        if self.zeros is not None and self.ones & self.zeros:
            raise ConfigError('A value cannot be coded both 1 and 0.')

    def apply(self, column, name):
        """Return the 0/1 coding of a string column."""
        values = column.str.strip()
        if self.identity:
            numeric = pd.to_numeric(values, errors='coerce')
            bad = ~numeric.isin((0, 1))
            if bad.any():
                raise DataError(
                    f'Column {name!r} is not binary: '
                    f'{sorted(values[bad].unique())[:5]}.'
                )
            return numeric.astype(np.uint8).to_numpy()
        ones = values.isin(self.ones)
        if self.zeros is not None:
            unmapped = ~ones & ~values.isin(self.zeros)
            if unmapped.any():
                raise DataError(
                    f'Column {name!r} has unmapped values '
                    f'{sorted(values[unmapped].unique())[:5]}.'
                )
        return ones.astype(np.uint8).to_numpy()


@dataclass(frozen=True)
class IngestSpec:
    variables: dict
    group: str
    thresholds: tuple = None
    quantiles: int = None
    group_labels: tuple = None
    missing: tuple = ()

    def __post_init__(self):
        if (self.thresholds is None) == (self.quantiles is None):
            raise ConfigError('Give either grouping thresholds or a number '
                              'of quantile groups.')
        if self.thresholds is not None:
            _check_increasing(self.thresholds, ConfigError)
        if self.quantiles is not None and self.quantiles < 2:
            raise ConfigError('Quantile grouping needs at least two groups.')
        if not self.variables:
            raise ConfigError('No response variables to ingest.')

    @property
    def n_groups(self):
        if self.thresholds is not None:
            return len(self.thresholds) + 1
        return self.quantiles


@dataclass
class IngestReport:
    rows_read: int
    rows_dropped: int
    thresholds: list
    group_sizes: dict = field(default_factory=dict)
    columns: list = field(default_factory=list)

    def __str__(self):
        sizes = ', '.join(f'{label}: {size}'
                          for label, size in self.group_sizes.items())
        return (f'{self.rows_read} rows read, {self.rows_dropped} dropped '
                f'for missing values; thresholds {self.thresholds}; '
                f'group sizes {sizes}')


def _check_increasing(values, error):
    values = np.asarray(values, dtype=float)
    if values.size and (np.diff(values) <= 0).any():
        raise error(f'Group thresholds must be strictly increasing, got '
                    f'{values.tolist()}.')


def group_thresholds(values, spec):
    """Explicit thresholds, or the empirical quantiles of ``values``."""
    if spec.thresholds is not None:
        return np.asarray(spec.thresholds, dtype=float)
    probs = np.arange(1, spec.quantiles) / spec.quantiles
    thresholds = np.quantile(values, probs)
    _check_increasing(thresholds, DataError)
    return thresholds


def assign_groups(values, thresholds):
    """Group index of each value; ties go to the lower group."""
    return np.searchsorted(thresholds, values, side='left')


def dichotomize(frame, spec):
    """Apply ``spec`` to a frame of string columns."""
    rows_read = len(frame)
    complete = frame.dropna(subset=[spec.group, *spec.variables])
    if complete.empty:
        raise DataError('No complete rows left after dropping missing '
                        'values.')
    grouping = pd.to_numeric(complete[spec.group].str.strip(),
                             errors='coerce')
    if grouping.isna().any():
        bad = complete[spec.group][grouping.isna()].unique()[:5]
        raise DataError(
            f'Grouping column {spec.group!r} is not numeric: {list(bad)}.'
        )
    thresholds = group_thresholds(grouping.to_numpy(), spec)
    index = assign_groups(grouping.to_numpy(), thresholds)
    columns = list(spec.variables)
    bits = np.column_stack([
        spec.variables[name].apply(complete[name], name) for name in columns
    ])
    labels = list(spec.group_labels or
                  [str(g) for g in range(spec.n_groups)])
    if len(labels) != spec.n_groups:
        raise ConfigError(f'Expected {spec.n_groups} group labels.')
    groups = []
    for g, label in enumerate(labels):
        rows = bits[index == g]
        if not len(rows):
            raise DataError(f'Group {label} is empty after filtering.')
        groups.append(BinaryDataset(rows, label, tuple(columns)))
    report = IngestReport(
        rows_read=rows_read,
        rows_dropped=rows_read - len(complete),
        thresholds=thresholds.tolist(),
        group_sizes={group.label: group.n for group in groups},
        columns=columns,
    )
    logger.info('Ingested %s', report)
    return Ingested(GroupedData(groups), report)


def ingest(csv_path, spec):
    """Read a survey CSV and split it into binary groups.

    Returns ``(data, report)``; rows with a missing value in any used
    column are dropped and counted in the report.
    """
    usecols = [spec.group, *spec.variables]
    try:
        frame = pd.read_csv(csv_path, dtype=str, usecols=usecols,
                            keep_default_na=False,
                            na_values=['', *spec.missing])
    except FileNotFoundError as exc:
        raise DataError(f'No such data file: {csv_path}.') from exc
    except ValueError as exc:
        raise DataError(f'Cannot read {csv_path}: {exc}') from exc
    return dichotomize(frame, spec)
