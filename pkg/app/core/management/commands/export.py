from core.management.base import MultisingCommand
from dataio.export import FORMATS, export_graphs
from dataio.store import read_selected


class Command(MultisingCommand):
    """Write the selected graphs of a summary for graph tools."""
    help = ('Export one graph per group plus a combined graph that marks '
            'the edges shared by every group.')

    def add_arguments(self, parser):
        parser.add_argument('summary', help='Summary JSON of a fit.')
        parser.add_argument('--format', choices=sorted(FORMATS),
                            default='edgelist')
        parser.add_argument('--out', required=True,
                            help='Directory for the graph files.')
        parser.add_argument('--prefix', default='graph')

    def run(self, *args, **options):
        selected, columns = read_selected(options['summary'])
        paths = export_graphs(selected, options['out'], options['format'],
                              columns, options['prefix'])
        for path in paths:
            self.stdout.write(str(path))
        self.success(f'Exported {len(paths)} {options["format"]} files.')
