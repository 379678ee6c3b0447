from pathlib import Path

from core.management.base import MultisingCommand, load_settings, versions
from dataio.store import write_json
from simlab.serializers import StudyConfigSerializer, StudyReportSerializer
from simlab.study import replicate_study


class Command(MultisingCommand):
    """Run a replicated simulation study."""
    help = ('Simulate every scenario, fit every method and tabulate mean '
            'MCC and F1 with their standard errors.')

    def add_arguments(self, parser):
        parser.add_argument('--config', default=None,
                            help='JSON study config.')
        parser.add_argument('--replicates', type=int, default=None)
        parser.add_argument('--seed', type=int, default=None)
        parser.add_argument('--workers', type=int, default=None)
        parser.add_argument('--out', required=True,
                            help='Directory for the study files.')

    def run(self, *args, **options):
        values = load_settings(options['config'])
        values.update({name: options[name]
                       for name in ('replicates', 'seed', 'workers')
                       if options[name] is not None})
        config = self.validated(StudyConfigSerializer, values)
        report = replicate_study(config)
        out = Path(options['out'])
        write_json({**StudyReportSerializer(report).data,
                    'versions': versions()}, out / 'study.json')
        report.records.to_csv(out / 'records.csv', index=False)
        report.table.to_csv(out / 'table.csv')
        self.stdout.write(report.table.to_string(float_format='%.3f'))
        self.success(f'Study written to {out}')
