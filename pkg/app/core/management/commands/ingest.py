from core.management.base import MultisingCommand, load_settings
from dataio.ingest import ingest
from dataio.serializers import IngestReportSerializer, IngestSpecSerializer
from dataio.store import write_grouped, write_json


class Command(MultisingCommand):
    """Dichotomize a survey export and split it into groups."""
    help = 'Turn a survey CSV into a grouped binary data CSV.'

    def add_arguments(self, parser):
        parser.add_argument('survey', help='Survey CSV with a header row.')
        parser.add_argument('--spec', required=True,
                            help='JSON ingestion spec.')
        parser.add_argument('--out', required=True,
                            help='Grouped data CSV to write.')
        parser.add_argument('--report', default=None,
                            help='Optional JSON file for the report.')

    def run(self, *args, **options):
        spec = self.validated(IngestSpecSerializer,
                              load_settings(options['spec']))
        data, report = ingest(options['survey'], spec)
        out = write_grouped(data, options['out'])
        if options['report']:
            write_json(IngestReportSerializer(report).data,
                       options['report'])
        self.stdout.write(str(report))
        self.success(f'Wrote {data.q} groups of {data.p} variables to {out}')
